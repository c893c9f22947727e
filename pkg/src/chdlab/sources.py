"""Time-dependent zero-mean mass sources S(t, x).

Three analytic families plus a file-backed one:

* `ZeroSource`          -- S = 0.
* `SeparableDecaySource`-- S = c (1+t)^{-(2+rho)/2} g(x).  The exponent is
  chosen so the squared-norm tail integral scales exactly like
  (1+t)^{-(1+rho)}: the decay class is saturated sharply.
* `PeriodicBoundedSource` -- S = a sin(omega t) g(x); translation bounded
  (finite sup over t of the unit-window integral of ||S||^2) but with an
  infinite tail.
* `TabulatedSource`     -- snapshot sequence, linearly interpolated in time
  and re-projected to zero mean.

Every emitted field has zero mean (the solvability requirement for
div u = S under an impermeable boundary); spatial profiles are projected at
construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Field, GridSpec, l2_norm, project_zero_mean


class UnsupportedSourceError(ValueError):
    """Requested quantity is not finite/defined for this source variant."""


def _projected_profile(g: Field) -> Field:
    prof = project_zero_mean(g)
    if not l2_norm(prof) > 0:
        raise ValueError("source spatial profile is constant; zero-mean projection leaves nothing")
    return prof


class SourceModel:
    """Common interface: evaluate(t), tail_integral(t), translation_bound()."""

    #: earliest admissible evaluation time (-inf when defined on all of R)
    start_time: float = -np.inf

    @property
    def defined_on_reals(self) -> bool:
        return self.start_time == -np.inf

    def evaluate(self, t: float) -> Field:
        raise NotImplementedError

    def tail_integral(self, t: float) -> float:
        """Integral over [t, inf) of ||S(s)||_{L2}^2 ds."""
        raise UnsupportedSourceError(f"{type(self).__name__} has no finite tail integral")

    def translation_bound(self) -> float:
        """sup over t of the unit-window integral of ||S(s)||^2."""
        raise NotImplementedError

    def norm_sq(self, t: float) -> float:
        """||S(t)||_{L2}^2 (overridden with closed forms where separable)."""
        return l2_norm(self.evaluate(t)) ** 2

    # internal fast path used by the stepper; default goes through evaluate()
    def _amps(self, t: float, grid: GridSpec):
        return grid.to_amps(self.evaluate(t).values)


@dataclass(frozen=True)
class ZeroSource(SourceModel):
    grid: GridSpec
    start_time: float = -np.inf

    def evaluate(self, t: float) -> Field:
        return Field.constant(self.grid, 0.0)

    def tail_integral(self, t: float) -> float:
        return 0.0

    def translation_bound(self) -> float:
        return 0.0

    def norm_sq(self, t: float) -> float:
        return 0.0

    def _amps(self, t, grid):
        return np.zeros((grid.nx, grid.ny))


class _SeparableSource(SourceModel):
    """S(t, x) = prefactor(t) * g(x) with zero-mean g frozen at construction."""

    def __init__(self, g: Field):
        prof = _projected_profile(g)
        self.profile = prof
        self._g_amps = prof.grid.to_amps(prof.values)
        self._g_amps[0, 0] = 0.0
        self.profile_norm = float(np.sqrt(prof.grid.l2sq_amps(self._g_amps)))

    def prefactor(self, t: float) -> float:
        raise NotImplementedError

    def evaluate(self, t: float) -> Field:
        self._check_time(t)
        return Field(self.profile.grid, self.prefactor(t) * self.profile.values)

    def norm_sq(self, t: float) -> float:
        self._check_time(t)
        return (self.prefactor(t) * self.profile_norm) ** 2

    def _amps(self, t, grid):
        self._check_time(t)
        return self.prefactor(t) * self._g_amps

    def _check_time(self, t):
        if t < self.start_time:
            raise ValueError(f"source is defined for t >= {self.start_time}, got {t}")


class SeparableDecaySource(_SeparableSource):
    """S = c (1+t)^{-(2+rho)/2} g(x) on t >= 0, rho > 0."""

    start_time = 0.0

    def __init__(self, g: Field, c: float, rho: float):
        if not rho > 0:
            raise ValueError("rho must be positive")
        super().__init__(g)
        self.c = float(c)
        self.rho = float(rho)

    def prefactor(self, t: float) -> float:
        return self.c * (1.0 + t) ** (-(2.0 + self.rho) / 2.0)

    def tail_integral(self, t: float) -> float:
        self._check_time(t)
        amp = (self.c * self.profile_norm) ** 2
        return amp * (1.0 + t) ** (-(1.0 + self.rho)) / (1.0 + self.rho)

    def translation_bound(self) -> float:
        # the decay is monotone, so the sup window starts at t = 0
        amp = (self.c * self.profile_norm) ** 2
        return amp * (1.0 - 2.0 ** (-(1.0 + self.rho))) / (1.0 + self.rho)


class PeriodicBoundedSource(_SeparableSource):
    """S = a sin(omega t) g(x), defined on all of R."""

    start_time = -np.inf

    def __init__(self, g: Field, a: float, omega_freq: float):
        if not omega_freq > 0:
            raise ValueError("omega_freq must be positive")
        super().__init__(g)
        self.a = float(a)
        self.omega_freq = float(omega_freq)

    def prefactor(self, t: float) -> float:
        return self.a * np.sin(self.omega_freq * t)

    def translation_bound(self) -> float:
        # int_t^{t+1} sin^2(w s) ds = 1/2 - sin(w) cos(w (2t+1)) / (2w);
        # the phase maximum is 1/2 + |sin(w)| / (2w)
        w = self.omega_freq
        peak = 0.5 + abs(np.sin(w)) / (2.0 * w)
        return (self.a * self.profile_norm) ** 2 * peak


class TabulatedSource(SourceModel):
    """Snapshot sequence interpolated linearly in t, then zero-mean projected."""

    def __init__(self, times, fields):
        times = [float(t) for t in times]
        if len(times) != len(fields) or len(times) < 2:
            raise ValueError("need at least two snapshots with matching times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ValueError("all snapshots must share one grid")
        self.times = np.array(times)
        self.fields = list(fields)
        self.grid = grid
        self.start_time = times[0]
        self.end_time = times[-1]

    @classmethod
    def from_index(cls, index_path) -> "TabulatedSource":
        """Load from a CSV index `index,time,path`; paths relative to it."""
        from .fieldio import read_field

        index_path = Path(index_path)
        times, fields = [], []
        with open(index_path, newline="") as fh:
            for row in csv.DictReader(fh):
                times.append(float(row["time"]))
                fields.append(read_field(index_path.parent / row["path"])[0])
        return cls(times, fields)

    def evaluate(self, t: float) -> Field:
        if not self.start_time <= t <= self.end_time:
            raise ValueError(
                f"t = {t} outside the tabulated range [{self.start_time}, {self.end_time}]"
            )
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        i = min(i, len(self.times) - 2)
        w = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        vals = (1.0 - w) * self.fields[i].values + w * self.fields[i + 1].values
        return project_zero_mean(Field(self.grid, vals))

    def translation_bound(self) -> float:
        # numeric sup of the rolling unit-window integral over the tabulated span
        ts = np.linspace(self.start_time, self.end_time, 40 * len(self.times))
        ns = np.array([self.norm_sq(t) for t in ts])
        best = 0.0
        for t0 in ts[ts <= self.end_time - 1.0]:
            sel = (ts >= t0) & (ts <= t0 + 1.0)
            best = max(best, float(np.trapezoid(ns[sel], ts[sel])))
        return best
