"""Pressure Poisson solve and Darcy velocity.

The pressure solves, with homogeneous Neumann conditions and zero mean,

    -lap(p) = S - div((gamma/eps) mu grad(phi)),

and the velocity is u = -grad(p) + (gamma/eps) mu grad(phi).  The product
mu grad(phi) is formed nodally and dealiased once; the same truncated
product feeds both the Poisson right-hand side and the velocity, so
div(u) = S holds exactly on resolved modes (only roundoff remains).
"""

from __future__ import annotations

import numpy as np

from .chemistry import PhysicsParams
from .grid import CompatibilityError, Field, GridSpec, VectorField, l2_norm


def _check_source_mean(s: Field, tol: float = 1e-12):
    m = float(s.values.mean())
    if abs(m) > tol * (1.0 + l2_norm(s)):
        raise CompatibilityError(
            f"mass source must have zero mean (div u = S is unsolvable otherwise); |mean| = {abs(m):.3e}"
        )


def _momentum_flux_amps(phi: Field, mu: Field, grid: GridSpec, use_dealias: bool = True):
    """Mixed-basis amplitudes of the dealiased product mu grad(phi)."""
    gx, gy = grid.grad_vals(grid.to_amps(phi.values))
    qx = grid.mixed_amps_x(mu.values * gx)
    qy = grid.mixed_amps_y(mu.values * gy)
    if use_dealias:
        qx = qx * grid._sinx_mask
        qy = qy * grid._siny_mask
    return qx, qy


def solve_pressure(phi: Field, mu: Field, s: Field, params: PhysicsParams) -> Field:
    """Zero-mean pressure of the Neumann Poisson problem driven by (S, mu grad phi)."""
    _check_source_mean(s)
    g = phi.grid
    coef = params.gamma / params.eps
    qx, qy = _momentum_flux_amps(phi, mu, g)
    rhs = g.to_amps(s.values) - coef * g.div_amps(qx, qy)
    p_amps = rhs / g._lam_safe
    p_amps[0, 0] = 0.0
    return Field(g, g.to_vals(p_amps))


def velocity(p: Field, mu: Field, phi: Field, params: PhysicsParams) -> VectorField:
    """Darcy velocity u = -grad(p) + (gamma/eps) mu grad(phi)."""
    g = phi.grid
    coef = params.gamma / params.eps
    qx, qy = _momentum_flux_amps(phi, mu, g)
    px, py = g.grad_vals(g.to_amps(p.values))
    ux = -px + coef * g.mixed_vals_x(qx)
    uy = -py + coef * g.mixed_vals_y(qy)
    return VectorField(Field(g, ux), Field(g, uy))


def divergence_constraint_residual(u: VectorField, s: Field) -> float:
    """L2 norm of div(u) - S."""
    g = u.grid
    div_amps = g.div_amps(g.mixed_amps_x(u.x.values), g.mixed_amps_y(u.y.values))
    return float(np.sqrt(g.l2sq_amps(div_amps - g.to_amps(s.values))))


def pressure_energy_identity_residual(
    p: Field, s: Field, mu: Field, phi: Field, params: PhysicsParams = PhysicsParams()
) -> float:
    """| ||grad p||^2 - int(S p + (gamma/eps) mu grad(phi) . grad(p)) |.

    The identity follows from multiplying the pressure Poisson equation by p
    and integrating by parts; for p produced by `solve_pressure` it holds to
    roundoff.
    """
    g = p.grid
    coef = params.gamma / params.eps
    p_amps = g.to_amps(p.values)
    grad_p_sq = g.l2sq_amps(p_amps * np.sqrt(g.lam))
    px, py = g.grad_vals(p_amps)
    qx, qy = _momentum_flux_amps(phi, mu, g)
    qx_vals = g.mixed_vals_x(qx)
    qy_vals = g.mixed_vals_y(qy)
    work = g.quad(s.values * p.values) + coef * g.quad(qx_vals * px + qy_vals * py)
    return abs(grad_p_sq - work)
