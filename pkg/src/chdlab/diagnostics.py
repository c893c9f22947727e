"""Per-step scalar observables and long-time experiment probes.

The discrete energy law mirrors the exact identity satisfied by smooth
solutions: testing the evolution equation with mu and the Darcy law with
(eps/gamma) u gives

    d/dt E(phi) + ||grad mu||^2 + (eps/gamma) ||u||^2
        = int S mu (1 - phi) dx + (eps/gamma) int p S dx,

which reduces to the familiar normalized form at eps = gamma = 1.  The
recorded residual evaluates the fluxes at the step's start values with the
source sampled at the step's end, matching the integrator's sampling, so it
decays at first order in dt on smooth runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .chemistry import PhysicsParams, _fprime_amps, double_well
from .grid import Field, hminus1_seminorm, sobolev_norm
from .sources import SourceModel
from .stepper import SimState, StepperConfig, final_state, make_state, step

NAN = float("nan")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    energy0: float
    grad_mu_sq: float
    u_sq: float
    s_sq: float
    energy_law_residual: float
    p_l2: float
    grad_p_l2: float
    div_residual: float
    stationarity_residual: float
    phi_h1: float
    phi_lap_l2: float
    dist_target_hm1: float = NAN
    e_tilde: float = NAN
    psi1: float = NAN

    @staticmethod
    def columns():
        return [f.name for f in fields(DiagnosticsRecord)]

    def as_row(self):
        return [getattr(self, f.name) for f in fields(DiagnosticsRecord)]


def _grad_sq_from_amps(g, amps):
    return float(np.sum(g.lam * amps * amps * g._pars))


def _l2sq_zero_mean(g, amps):
    s = float(np.sum(amps * amps * g._pars))
    return s - amps[0, 0] ** 2 * g._pars[0, 0]


def _energy_from_state(state: SimState, params: PhysicsParams) -> float:
    g = state.grid
    return 0.5 * params.eps**2 * _grad_sq_from_amps(g, state._phi_amps) + g.quad(
        double_well(state.phi.values)
    )


def energy_law_residual(prev: SimState, new: SimState, m: SourceModel,
                        params: PhysicsParams, dt: float,
                        e_prev: float | None = None, e_new: float | None = None) -> float:
    """Defect of the discrete energy identity across one step (first order)."""
    g = prev.grid
    w = params.eps / params.gamma
    if e_prev is None:
        e_prev = _energy_from_state(prev, params)
    if e_new is None:
        e_new = _energy_from_state(new, params)
    diss = _grad_sq_from_amps(g, prev._mu_amps) + w * g.quad(
        prev.u.x.values**2 + prev.u.y.values**2
    )
    s_vals = m.evaluate(new.t).values
    flux = g.quad(s_vals * prev.mu.values * (1.0 - prev.phi.values))
    flux += w * g.quad(prev.p.values * s_vals)
    return abs((e_new - e_prev) / dt + diss - flux)


def stationarity_residual(phi: Field, params: PhysicsParams, use_dealias: bool = True) -> float:
    """L2 norm of the zero-mean part of -eps^2 lap(phi) + f'(phi).

    Vanishes exactly (in spectral arithmetic) on constants and on every
    steady state; doubles as the convergence measure for the steady solver.
    """
    g = phi.grid
    amps = g.to_amps(phi.values)
    res = params.eps**2 * g.lam * amps + _fprime_amps(phi.values, g, use_dealias)
    return float(np.sqrt(_l2sq_zero_mean(g, res)))


def psi1_functional(phi: Field, c5: float, c9: float, params: PhysicsParams) -> float:
    """Dissipativity functional E(phi) + c5 ||A^{-1/2}(phi - mean)||^2 + c9 + 1."""
    if c5 < 0 or c9 < 0:
        raise ValueError("c5 and c9 must be nonnegative")
    from .chemistry import energy

    return energy(phi, params) + c5 * hminus1_seminorm(phi) ** 2 + c9 + 1.0


class Recorder:
    """Builds DiagnosticsRecord rows from consecutive states.

    Heavy norms are read off the cached spectral coefficients; the only
    per-record transforms are the two needed for the div(u) - S residual.
    Optional extras: distance to a target state (homogeneous dual norm),
    the tail-compensated energy (needs k1 and a source with a finite tail
    integral), and the dissipativity functional (needs c5, c9).
    """

    def __init__(self, m: SourceModel, params: PhysicsParams, target: Field | None = None,
                 k1: float | None = None, psi_c5: float | None = None, psi_c9: float | None = None):
        self.m = m
        self.params = params
        self.k1 = k1
        self.psi_c5 = psi_c5
        self.psi_c9 = psi_c9
        self._target_amps = None
        if target is not None:
            self._target_amps = target.grid.to_amps(target.values)
        self._energy_cache: tuple[float, float] | None = None   # (t, energy)

    def __call__(self, prev: SimState | None, state: SimState, dt: float) -> DiagnosticsRecord:
        g = state.grid
        p = self.params
        phi_amps = state._phi_amps
        mu_amps = state._mu_amps
        p_amps = state._p_amps

        mass = float(phi_amps[0, 0])
        grad_phi_sq = _grad_sq_from_amps(g, phi_amps)
        f_int = g.quad(double_well(state.phi.values))
        energy = 0.5 * p.eps**2 * grad_phi_sq + f_int
        energy0 = 0.5 * grad_phi_sq + f_int + 1.0
        u_sq = g.quad(state.u.x.values**2 + state.u.y.values**2)

        resid = NAN
        if prev is not None:
            e_prev = None
            if self._energy_cache is not None and self._energy_cache[0] == prev.t:
                e_prev = self._energy_cache[1]
            resid = energy_law_residual(prev, state, self.m, p, dt, e_prev=e_prev, e_new=energy)
        self._energy_cache = (state.t, energy)

        div_amps = g.div_amps(
            g.mixed_amps_x(state.u.x.values), g.mixed_amps_y(state.u.y.values)
        )
        div_res = float(np.sqrt(g.l2sq_amps(div_amps - state._s_amps)))

        # the mean mode has lambda = 0, so this matches sobolev_norm(phi, 1)
        phi_h1 = math.sqrt(float(np.sum((1.0 + g.lam) * phi_amps**2 * g._pars)))
        phi_lap = float(np.sqrt(np.sum(g.lam**2 * phi_amps**2 * g._pars)))

        dist = NAN
        if self._target_amps is not None:
            d = phi_amps - self._target_amps
            w = g._pars / g._lam_safe
            dist = float(np.sqrt(np.sum(d * d * w) - d[0, 0] ** 2 * w[0, 0]))

        e_tilde = NAN
        if self.k1 is not None:
            e_tilde = energy + self.k1 * self.m.tail_integral(state.t)

        psi1 = NAN
        if self.psi_c5 is not None and self.psi_c9 is not None:
            hm1_sq = float(np.sum(phi_amps**2 * g._pars / g._lam_safe)) - (
                phi_amps[0, 0] ** 2 * g._pars[0, 0]
            )
            psi1 = energy + self.psi_c5 * hm1_sq + self.psi_c9 + 1.0

        return DiagnosticsRecord(
            t=state.t,
            mass=mass,
            energy=energy,
            energy0=energy0,
            grad_mu_sq=_grad_sq_from_amps(g, mu_amps),
            u_sq=u_sq,
            s_sq=self.m.norm_sq(state.t),
            energy_law_residual=resid,
            p_l2=float(np.sqrt(g.l2sq_amps(p_amps))),
            grad_p_l2=float(np.sqrt(_grad_sq_from_amps(g, p_amps))),
            div_residual=div_res,
            stationarity_residual=float(np.sqrt(_l2sq_zero_mean(g, mu_amps))),
            phi_h1=phi_h1,
            phi_lap_l2=phi_lap,
            dist_target_hm1=dist,
            e_tilde=e_tilde,
            psi1=psi1,
        )


def lyapunov_tilde(record, m: SourceModel, k1: float):
    """Tail-compensated energy along a trajectory record.

    Returns (values, max_positive_increment): values[i] = E(t_i) + k1 *
    tail_integral(t_i).  For admissible k1 the sequence is non-increasing up
    to time-discretization error; the maximal positive increment quantifies
    any violation.
    """
    vals = np.array([rec.energy + k1 * m.tail_integral(t) for t, rec in record.entries])
    inc = float(np.max(np.diff(vals))) if len(vals) > 1 else 0.0
    return vals, max(inc, 0.0)


def sweep_k1(record, m: SourceModel, candidates, tol: float):
    """Smallest k1 among candidates whose lyapunov_tilde increment is <= tol."""
    for k1 in candidates:
        _, inc = lyapunov_tilde(record, m, k1)
        if inc <= tol:
            return k1, inc
    return None, lyapunov_tilde(record, m, candidates[-1])[1]


def rate_fit(times, distances):
    """Least-squares power-law fit distance ~ (1+t)^(-lambda).

    Returns (lambda_hat, r_squared) from the regression of log(distance)
    on log(1+t).  Requires at least 8 strictly positive samples.
    """
    times = np.asarray(times, dtype=np.float64)
    distances = np.asarray(distances, dtype=np.float64)
    if times.size < 8:
        raise ValueError("rate_fit needs at least 8 samples")
    if np.any(distances <= 0):
        raise ValueError("rate_fit needs strictly positive distances")
    x = np.log1p(times)
    y = np.log(distances)
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(-slope), float(r2)


@dataclass(frozen=True)
class DependenceEntry:
    delta: float
    amplification: float          # H1 distance at T over delta * ||direction||_H1
    dissipation_integral: float   # int_0^T ||grad(mu1-mu2)||^2 + ||u1-u2||^2 dt
    dissipation_ratio: float      # the integral over (delta ||direction||_H1)^2


@dataclass(frozen=True)
class DependenceReport:
    entries: tuple
    direction_h1: float
    t_final: float

    @property
    def amplifications(self):
        return np.array([e.amplification for e in self.entries])

    def max_spread(self) -> float:
        """Relative spread of the amplification ratios across deltas."""
        r = self.amplifications
        return float((r.max() - r.min()) / r.min())


def continuous_dependence_probe(phi0: Field, delta_dir: Field, deltas, m: SourceModel,
                                cfg: StepperConfig, params: PhysicsParams, t_final: float,
                                t0: float = 0.0) -> DependenceReport:
    """Paired-trajectory sensitivity probe.

    Advances the base trajectory and one perturbed copy per delta in
    lockstep to t_final, reporting the normalized terminal H1 amplification
    and the accumulated dissipation-difference integrals.  Zero deltas are
    skipped (identical trajectories).
    """
    deltas = [d for d in deltas if d > 0]
    if not deltas:
        raise ValueError("need at least one positive delta")
    g = phi0.grid
    dir_h1 = sobolev_norm(delta_dir, 1.0)
    base = make_state(t0, phi0, m, params, cfg.dealias)
    pert = [
        make_state(t0, Field(g, phi0.values + d * delta_dir.values), m, params, cfg.dealias)
        for d in deltas
    ]
    diss = [0.0 for _ in deltas]
    n_steps = int(round((t_final - t0) / cfg.dt))
    for _ in range(n_steps):
        new_base = step(base, m, cfg, params)
        for i, st in enumerate(pert):
            new_p = step(st, m, cfg, params)
            dmu = base._mu_amps - st._mu_amps
            diss[i] += cfg.dt * (
                _grad_sq_from_amps(g, dmu)
                + g.quad(
                    (base.u.x.values - st.u.x.values) ** 2
                    + (base.u.y.values - st.u.y.values) ** 2
                )
            )
            pert[i] = new_p
        base = new_base
    entries = []
    for d, st, dv in zip(deltas, pert, diss):
        dist = sobolev_norm(Field(g, base.phi.values - st.phi.values), 1.0)
        scale = d * dir_h1
        entries.append(DependenceEntry(d, dist / scale, dv, dv / scale**2))
    return DependenceReport(tuple(entries), dir_h1, t_final)


@dataclass(frozen=True)
class PullbackReport:
    back_times: tuple
    pairwise_h2: tuple            # consecutive pairs, same order as back_times[:-1]
    terminal_h1: tuple            # ||phi(t*)||_H1 per back time
    scalings: tuple
    scaled_terminal_h1: tuple     # per scaling, at the largest back time
    h1_history: tuple             # (t, ||phi||_H1) samples along the longest run

    def scaled_spread(self) -> float:
        v = np.array(self.scaled_terminal_h1)
        return float((v.max() - v.min()) / v.min())


def pullback_probe(phi0: Field, m: SourceModel, back_times, t_star: float,
                   cfg: StepperConfig, params: PhysicsParams,
                   scalings=(1.0, 3.0, 10.0), history_every: int = 20) -> PullbackReport:
    """Pullback convergence probe U(t*, t* - T_k) phi0 for increasing T_k.

    The source must be defined on all of R.  Initial-data scalings multiply
    the fluctuation about the mean (the mean is conserved, so scaling it
    would change the limit trajectory, not test absorption).
    """
    back_times = sorted(float(b) for b in back_times)
    if len(back_times) < 2 or any(b <= 0 for b in back_times):
        raise ValueError("need at least two positive back times")
    if not m.defined_on_reals:
        raise ValueError("pullback probe needs a source defined on all of R")
    g = phi0.grid

    finals, terminal_h1 = [], []
    history = []
    longest = back_times[-1]
    for tk in back_times:
        state = make_state(t_star - tk, phi0, m, params, cfg.dealias)
        n_steps = int(round(tk / cfg.dt))
        for i in range(n_steps):
            state = step(state, m, cfg, params)
            if tk == longest and (i + 1) % history_every == 0:
                h1 = math.sqrt(
                    float(np.sum((1.0 + g.lam) * state._phi_amps**2 * g._pars))
                )
                history.append((state.t, h1))
        finals.append(state.phi)
        terminal_h1.append(sobolev_norm(state.phi, 1.0))

    pairwise = tuple(
        sobolev_norm(Field(g, a.values - b.values), 2.0)
        for a, b in zip(finals, finals[1:])
    )

    mean0 = float(phi0.values.mean())
    scaled_h1 = []
    for s in scalings:
        scaled = Field(g, mean0 + s * (phi0.values - mean0))
        state = make_state(t_star - longest, scaled, m, params, cfg.dealias)
        state = final_state(state, m, cfg, params, t_star)
        scaled_h1.append(sobolev_norm(state.phi, 1.0))

    return PullbackReport(
        tuple(back_times), pairwise, tuple(terminal_h1),
        tuple(float(s) for s in scalings), tuple(scaled_h1), tuple(history),
    )
