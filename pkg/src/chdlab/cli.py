"""Command line entry point: chd-lab <config-path> [--override key=value]..."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, apply_overrides, build_config, parse_config
from .experiments import EXIT_CONFIG, dispatch


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chd-lab",
        description="Spectral Cahn-Hilliard-Darcy simulation and verification experiments",
    )
    parser.add_argument("config", help="path to an INI-style run configuration")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    args = parser.parse_args(argv)

    path = Path(args.config)
    if not path.is_file():
        print(f"configuration error: no such config file: {path}")
        return EXIT_CONFIG
    try:
        cfg = parse_config(path.read_text())
        if args.override:
            cfg = build_config(apply_overrides(cfg.raw, args.override))
    except ConfigError as err:
        print(f"configuration error: {err}")
        return EXIT_CONFIG

    status = dispatch(cfg)
    if status == 0:
        print(f"done; outputs in {cfg.run.outdir}")
    return status


if __name__ == "__main__":
    sys.exit(main())
