"""Run configuration: INI-style text -> validated RunConfig.

Sections: [grid], [physics], [initial], [source], [stepper], [run],
[experiment].  Every validation failure raises ConfigError naming the
offending `section.key`.  Random initial data and source profiles are
generated by numpy's seeded PCG64 generator, so identical configs (and
seeds) reproduce outputs byte-identically.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field as dc_field

import numpy as np

from .chemistry import PhysicsParams
from .grid import Field, GridSpec, project_zero_mean
from .sources import (
    PeriodicBoundedSource,
    SeparableDecaySource,
    SourceModel,
    TabulatedSource,
    ZeroSource,
)
from .stepper import StepperConfig

INITIAL_KINDS = ("constant", "cosine-perturbation", "random-seeded", "file")
SOURCE_VARIANTS = ("zero", "separable-decay", "periodic-bounded", "tabulated")
EXPERIMENT_KINDS = ("simulate", "steady", "rate", "pullback", "dependence", "gronwall-verify")
PROFILE_KINDS = ("cosine", "random-seeded", "file")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"[{key}] {message}")
        self.key = key


@dataclass(frozen=True)
class RunSection:
    t_end: float = 1.0
    snapshot_every: int = 0       # steps between snapshots; 0 disables
    diagnostics_every: int = 1
    outdir: str = "chd-out"


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    physics: PhysicsParams
    initial: dict
    source: dict
    stepper: StepperConfig
    run: RunSection
    experiment: dict              # {'kind': ..., remaining keys str -> str}
    raw: dict = dc_field(repr=False, default_factory=dict)


def _get(section, sec_name, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{sec_name}.{key}", "missing required key")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{sec_name}.{key}", f"cannot parse {raw!r} as {conv.__name__}")


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _floats(raw: str):
    return tuple(float(v) for v in raw.split())


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError (line-precise for syntax)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError("syntax", str(err))

    sections = {name: dict(cp[name]) for name in cp.sections()}
    return build_config(sections)


def build_config(sections: dict) -> RunConfig:
    g = sections.get("grid", {})
    grid_kwargs = dict(
        nx=_get(g, "grid", "nx", int, 64),
        ny=_get(g, "grid", "ny", int, 64),
        lx=_get(g, "grid", "lx", float, 1.0),
        ly=_get(g, "grid", "ly", float, 1.0),
    )
    try:
        grid = GridSpec(**grid_kwargs)
    except ValueError as err:
        raise ConfigError("grid", str(err))

    p = sections.get("physics", {})
    try:
        physics = PhysicsParams(
            eps=_get(p, "physics", "eps", float, 1.0),
            gamma=_get(p, "physics", "gamma", float, 1.0),
        )
    except ValueError as err:
        raise ConfigError("physics", str(err))

    ini = dict(sections.get("initial", {}))
    kind = ini.get("kind", "constant")
    if kind not in INITIAL_KINDS:
        raise ConfigError("initial.kind", f"unknown kind {kind!r}; expected one of {INITIAL_KINDS}")
    ini["kind"] = kind

    src = dict(sections.get("source", {}))
    variant = src.get("variant", "zero")
    if variant not in SOURCE_VARIANTS:
        raise ConfigError(
            "source.variant", f"unknown variant {variant!r}; expected one of {SOURCE_VARIANTS}"
        )
    src["variant"] = variant

    st = sections.get("stepper", {})
    try:
        stepper = StepperConfig(
            dt=_get(st, "stepper", "dt", float, 1e-4),
            beta=_get(st, "stepper", "beta", float, 2.0),
            picard_iters=_get(st, "stepper", "picard_iters", int, 0),
            dealias=_get(st, "stepper", "dealias", _bool, True),
        )
    except ValueError as err:
        raise ConfigError("stepper", str(err))

    r = sections.get("run", {})
    run = RunSection(
        t_end=_get(r, "run", "t_end", float, 1.0),
        snapshot_every=_get(r, "run", "snapshot_every", int, 0),
        diagnostics_every=_get(r, "run", "diagnostics_every", int, 1),
        outdir=r.get("outdir", "chd-out"),
    )
    if run.diagnostics_every < 1:
        raise ConfigError("run.diagnostics_every", "must be >= 1")
    if run.snapshot_every < 0:
        raise ConfigError("run.snapshot_every", "must be >= 0")

    exp = dict(sections.get("experiment", {}))
    exp_kind = exp.get("kind", "simulate")
    if exp_kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            "experiment.kind", f"unknown kind {exp_kind!r}; expected one of {EXPERIMENT_KINDS}"
        )
    exp["kind"] = exp_kind

    cfg = RunConfig(grid, physics, ini, src, stepper, run, exp, raw=sections)
    # materialize eagerly so bad configs fail at load, not mid-run
    build_initial_field(cfg)
    build_source(cfg)
    return cfg


def apply_overrides(sections: dict, overrides) -> dict:
    """Apply repeatable `section.key=value` strings to a raw section dict."""
    out = {name: dict(vals) for name, vals in sections.items()}
    for item in overrides:
        if "=" not in item:
            raise ConfigError("override", f"expected section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError("override", f"expected section.key=value, got {item!r}")
        sec, key = target.split(".", 1)
        out.setdefault(sec.strip(), {})[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# field and source construction


def cosine_field(grid: GridSpec, mean: float, amplitude: float, mode_x: int, mode_y: int) -> Field:
    X, Y = grid.meshgrid()
    pert = np.cos(mode_x * np.pi * X / grid.lx) * np.cos(mode_y * np.pi * Y / grid.ly)
    return Field(grid, mean + amplitude * pert)


def random_band_field(grid: GridSpec, seed: int, amplitude: float,
                      spectral_exponent: float = 0.0, mean: float = 0.0,
                      max_mode: int | None = None) -> Field:
    """Seeded random field: iid normal mode amplitudes shaped by lambda^-q.

    The fluctuation is zero-mean, restricted to the dealiased band (and to
    modes <= max_mode per axis if given), and rescaled so its sup-norm
    equals `amplitude`.  PCG64 keeps this reproducible across platforms.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    amps = rng.standard_normal((grid.nx, grid.ny))
    weight = grid._lam_safe ** (-spectral_exponent)
    amps = amps * weight * grid.dealias_mask
    if max_mode is not None:
        band = (np.arange(grid.nx)[:, None] <= max_mode) & (np.arange(grid.ny)[None, :] <= max_mode)
        amps = amps * band
    amps[0, 0] = 0.0
    vals = grid.to_vals(amps)
    peak = np.abs(vals).max()
    if peak == 0:
        raise ValueError("random field came out identically zero")
    return Field(grid, mean + (amplitude / peak) * vals)


def build_initial_field(cfg: RunConfig) -> Field:
    ini, grid = cfg.initial, cfg.grid
    kind = ini["kind"]
    if kind == "constant":
        return Field.constant(grid, _get(ini, "initial", "mean", float, 0.0))
    if kind == "cosine-perturbation":
        return cosine_field(
            grid,
            _get(ini, "initial", "mean", float, 0.0),
            _get(ini, "initial", "amplitude", float, required=True),
            _get(ini, "initial", "mode_x", int, 1),
            _get(ini, "initial", "mode_y", int, 0),
        )
    if kind == "random-seeded":
        return random_band_field(
            grid,
            _get(ini, "initial", "seed", int, required=True),
            _get(ini, "initial", "amplitude", float, required=True),
            _get(ini, "initial", "spectral_exponent", float, 0.0),
            _get(ini, "initial", "mean", float, 0.0),
            _get(ini, "initial", "max_mode", int, None),
        )
    from .fieldio import read_field

    path = ini.get("path")
    if not path:
        raise ConfigError("initial.path", "missing required key")
    f, _ = read_field(path)
    if f.grid != grid:
        raise ConfigError("initial.path", f"snapshot grid {f.grid} does not match [grid]")
    return f


def _build_profile(src: dict, grid: GridSpec) -> Field:
    kind = src.get("profile", "cosine")
    if kind not in PROFILE_KINDS:
        raise ConfigError(
            "source.profile", f"unknown profile {kind!r}; expected one of {PROFILE_KINDS}"
        )
    if kind == "cosine":
        jx = _get(src, "source", "profile_mode_x", int, 1)
        jy = _get(src, "source", "profile_mode_y", int, 1)
        prof = cosine_field(grid, 0.0, 1.0, jx, jy)
    elif kind == "random-seeded":
        prof = random_band_field(
            grid,
            _get(src, "source", "profile_seed", int, required=True),
            1.0,
            _get(src, "source", "profile_exponent", float, 0.0),
            0.0,
            _get(src, "source", "profile_max_mode", int, 8),
        )
    else:
        from .fieldio import read_field

        path = src.get("profile_path")
        if not path:
            raise ConfigError("source.profile_path", "missing required key")
        prof, _ = read_field(path)
        if prof.grid != grid:
            raise ConfigError("source.profile_path", "snapshot grid does not match [grid]")
    m = float(prof.values.mean())
    scale = 1.0 + float(np.sqrt(np.mean(prof.values**2) * grid.area))
    if abs(m) > 1e-12 * scale:
        raise ConfigError(
            "source.profile",
            f"spatial profile has nonzero mean ({m:.3e}); a mass source must integrate "
            "to zero for div u = S to be solvable",
        )
    return project_zero_mean(prof)


def build_source(cfg: RunConfig) -> SourceModel:
    src, grid = cfg.source, cfg.grid
    variant = src["variant"]
    if variant == "zero":
        return ZeroSource(grid)
    if variant == "tabulated":
        index = src.get("index")
        if not index:
            raise ConfigError("source.index", "missing required key")
        return TabulatedSource.from_index(index)
    prof = _build_profile(src, grid)
    if variant == "separable-decay":
        try:
            return SeparableDecaySource(
                prof,
                _get(src, "source", "c", float, required=True),
                _get(src, "source", "rho", float, required=True),
            )
        except ValueError as err:
            raise ConfigError("source", str(err))
    try:
        return PeriodicBoundedSource(
            prof,
            _get(src, "source", "a", float, required=True),
            _get(src, "source", "omega", float, required=True),
        )
    except ValueError as err:
        raise ConfigError("source", str(err))
