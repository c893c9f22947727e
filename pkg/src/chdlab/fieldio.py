"""Plain-text snapshot and diagnostics file formats.

Snapshot format (CHDFIELD version 1):

    line 1:  CHDFIELD 1
    line 2:  nx ny lx ly t
    then nx*ny values, row-major (x index outer), one per line, 17
    significant digits.

Diagnostics are CSV with a header row naming every column and one row per
accepted step, full double precision.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import Field, GridSpec

MAGIC = "CHDFIELD 1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field(path, f: Field, t: float = 0.0) -> None:
    g = f.grid
    lines = [MAGIC, f"{g.nx} {g.ny} {_fmt(g.lx)} {_fmt(g.ly)} {_fmt(t)}"]
    lines.extend(_fmt(v) for v in f.values.ravel(order="C"))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path):
    """Read a CHDFIELD snapshot; returns (Field, t)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise ValueError(f"{path}: not a CHDFIELD version-1 snapshot")
    head = lines[1].split()
    if len(head) != 5:
        raise ValueError(f"{path}: malformed header line 2")
    nx, ny = int(head[0]), int(head[1])
    lx, ly, t = float(head[2]), float(head[3]), float(head[4])
    vals = np.array([float(v) for v in lines[2 : 2 + nx * ny]])
    if vals.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, found {vals.size}")
    grid = GridSpec(nx, ny, lx, ly)
    return Field(grid, vals.reshape(nx, ny)), t


def write_diagnostics_csv(path, records) -> None:
    """Write DiagnosticsRecord rows; deterministic full-precision text."""
    from .diagnostics import DiagnosticsRecord

    cols = DiagnosticsRecord.columns()
    lines = [",".join(cols)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.as_row()))
    Path(path).write_text("\n".join(lines) + "\n")
