"""Steady states of the flow under the mass constraint.

Constants are always steady; nonconstant states are found by running the
full coupled dynamics with zero source (an energy-decreasing gradient flow)
until the stationarity residual || P0(-eps^2 lap(phi) + f'(phi)) || drops
below tolerance.  Convergence is declared on that residual, not on
step-to-step differences, and the returned field keeps the prescribed mean
exactly (the integrator conserves it mode-by-mode).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chemistry import PhysicsParams
from .diagnostics import _energy_from_state, _l2sq_zero_mean
from .grid import Field, GridSpec
from .sources import ZeroSource
from .stepper import StepperConfig, make_state, step


class NonConvergenceError(RuntimeError):
    """Stationarity tolerance not reached; carries the best iterate."""

    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class StationaryResult:
    phi: Field
    residual: float
    energy: float
    mass: float
    steps: int
    elapsed: float      # simulated gradient-flow time


def constant_state(M: float, grid: GridSpec) -> Field:
    """The constant member of the steady set (stationarity residual 0)."""
    return Field.constant(grid, M)


def solve_stationary(M: float, seed: Field, params: PhysicsParams, tol: float,
                     max_time: float, dt0: float = 1e-4, dt_max: float = 0.25,
                     beta: float = 2.0) -> StationaryResult:
    """Relax `seed` (mean M) to a steady state with residual below tol.

    The time step grows geometrically while the energy keeps decreasing and
    is halved on any energy increase beyond roundoff, so arbitrary seeds
    relax robustly.  Raises NonConvergenceError if `max_time` units of flow
    do not reach the tolerance.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = seed.grid
    mean_seed = float(seed.values.mean())
    if abs(mean_seed - M) > 1e-12 * (1.0 + abs(M)):
        raise ValueError(f"seed mean {mean_seed!r} does not match the mass constraint M = {M!r}")

    m = ZeroSource(g)
    state = make_state(0.0, seed, m, params)
    e_prev = _energy_from_state(state, params)
    dt = dt0
    steps = 0
    best_state, best_res = state, _residual(state, params)
    if best_res < tol:
        return _result(state, params, best_res, steps)

    while state.t < max_time:
        cfg = StepperConfig(dt=dt, beta=beta)
        candidate = step(state, m, cfg, params)
        e_new = _energy_from_state(candidate, params)
        if e_new > e_prev + 1e-12 * (1.0 + abs(e_prev)) and dt > 4.0 * dt0:
            dt = max(dt / 2.0, dt0)
            continue
        state, e_prev = candidate, e_new
        steps += 1
        dt = min(dt * 1.1, dt_max)
        res = _residual(state, params)
        if res < best_res:
            best_state, best_res = state, res
        if res < tol:
            return _result(state, params, res, steps)

    raise NonConvergenceError(
        f"stationarity residual {best_res:.3e} above tol {tol:.3e} after t = {max_time}",
        _result(best_state, params, best_res, steps),
        best_res,
    )


def _residual(state, params) -> float:
    # mu caches are built with the dealiased cubic, matching the dynamics
    return float(np.sqrt(_l2sq_zero_mean(state.grid, state._mu_amps)))


def _result(state, params, res, steps) -> StationaryResult:
    return StationaryResult(
        phi=state.phi,
        residual=res,
        energy=_energy_from_state(state, params),
        mass=state.mass,
        steps=steps,
        elapsed=state.t,
    )
