"""Double-well potential, chemical potential, and energy functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, quadrature


@dataclass(frozen=True)
class PhysicsParams:
    """Interface width eps and adhesion coefficient gamma (both > 0).

    Defaults follow the standard normalization eps = gamma = 1.
    """

    eps: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def double_well(v):
    """f(v) = v^4/4 - v^2/2, minima at v = +-1 with f(+-1) = -1/4."""
    v = np.asarray(v, dtype=np.float64)
    v2 = v * v
    out = 0.25 * v2 * v2 - 0.5 * v2
    return float(out) if out.ndim == 0 else out


def double_well_prime(v):
    """f'(v) = v^3 - v."""
    v = np.asarray(v, dtype=np.float64)
    out = v * v * v - v
    return float(out) if out.ndim == 0 else out


def _fprime_amps(phi_vals, grid, use_dealias=True, phi_amps=None):
    """Amplitudes of f'(phi) with the cubic formed nodally, then truncated."""
    cube = grid.to_amps(phi_vals * phi_vals * phi_vals)
    if use_dealias:
        cube *= grid.dealias_mask
    if phi_amps is None:
        phi_amps = grid.to_amps(phi_vals)
    return cube - phi_amps


def chemical_potential(phi: Field, params: PhysicsParams, use_dealias: bool = True) -> Field:
    """mu = -eps^2 lap(phi) + phi^3 - phi, cubic dealiased by the 2/3 rule."""
    g = phi.grid
    amps = g.to_amps(phi.values)
    mu_amps = params.eps**2 * g.lam * amps + _fprime_amps(phi.values, g, use_dealias)
    return Field(g, g.to_vals(mu_amps))


def energy(phi: Field, params: PhysicsParams) -> float:
    """Free energy: integral of eps^2/2 |grad phi|^2 + f(phi)."""
    g = phi.grid
    grad_sq = g.l2sq_amps(g.to_amps(phi.values) * np.sqrt(g.lam))
    return 0.5 * params.eps**2 * grad_sq + g.quad(double_well(phi.values))


def energy_e0(phi: Field) -> float:
    """Shifted unit-eps energy E0 = 1/2 ||grad phi||^2 + int f(phi) + 1."""
    g = phi.grid
    grad_sq = g.l2sq_amps(g.to_amps(phi.values) * np.sqrt(g.lam))
    return 0.5 * grad_sq + g.quad(double_well(phi.values)) + 1.0


def energy_directional_derivative(phi: Field, direction: Field, params: PhysicsParams) -> float:
    """Integral of mu(phi) * direction; the first variation of `energy`."""
    mu = chemical_potential(phi, params)
    return quadrature(Field(phi.grid, mu.values * direction.values))
