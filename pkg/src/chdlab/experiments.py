"""Experiment orchestration: each kind consumes a RunConfig and emits files.

Every experiment writes `report.txt` plus a figure into the run directory;
simulation-type experiments also stream `diagnostics.csv` (one row per
recorded step, full precision) and optional CHDFIELD snapshots.  Exit
statuses: 0 success, 2 validation error, 3 integration failure, 4
non-convergence.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import plots
from .config import ConfigError, RunConfig, build_initial_field, build_source, _get
from .diagnostics import (
    Recorder,
    continuous_dependence_probe,
    pullback_probe,
    rate_fit,
    sweep_k1,
)
from .fieldio import write_diagnostics_csv, write_field, _fmt
from .grid import Field, hminus1_seminorm
from .gronwall import verify_ensemble
from .sources import SeparableDecaySource
from .steady import NonConvergenceError, solve_stationary
from .stepper import IntegrationFailureError, make_state, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_NONCONVERGENCE = 4


def dispatch(cfg: RunConfig) -> int:
    """Run the configured experiment; returns the process exit status."""
    outdir = Path(cfg.run.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    kind = cfg.experiment["kind"]
    runner = {
        "simulate": _run_simulate,
        "steady": _run_steady,
        "rate": _run_rate,
        "pullback": _run_pullback,
        "dependence": _run_dependence,
        "gronwall-verify": _run_gronwall,
    }[kind]
    try:
        runner(cfg, outdir)
    except ConfigError as err:
        _write_report(outdir, [f"status = error", f"error = {err}"])
        print(f"configuration error: {err}")
        return EXIT_CONFIG
    except IntegrationFailureError as err:
        _write_report(outdir, [f"status = integration-failure", f"error = {err}"])
        print(f"integration failure: {err}")
        return EXIT_INTEGRATION
    except NonConvergenceError as err:
        _write_report(outdir, [f"status = non-convergence", f"error = {err}"])
        print(f"non-convergence: {err}")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _write_report(outdir: Path, lines) -> None:
    (outdir / "report.txt").write_text("\n".join(lines) + "\n")


class _SnapshotWriter:
    def __init__(self, outdir: Path, every: int):
        self.dir = outdir / "snapshots"
        self.every = every
        if every > 0:
            self.dir.mkdir(exist_ok=True)

    def start(self, state):
        if self.every > 0:
            write_field(self.dir / "000000.chdfield", state.phi, state.t)

    def __call__(self, prev, new, idx):
        if self.every > 0 and idx % self.every == 0:
            write_field(self.dir / f"{idx:06d}.chdfield", new.phi, new.t)


class _LastState:
    def __init__(self, state0):
        self.state = state0

    def __call__(self, prev, new, idx):
        self.state = new


def _run_simulate(cfg: RunConfig, outdir: Path) -> None:
    phi0 = build_initial_field(cfg)
    m = build_source(cfg)
    state0 = make_state(0.0, phi0, m, cfg.physics, cfg.stepper.dealias)
    snaps = _SnapshotWriter(outdir, cfg.run.snapshot_every)
    snaps.start(state0)
    last = _LastState(state0)
    record = run(
        state0, m, cfg.stepper, cfg.physics, cfg.run.t_end,
        observers=(snaps, last), recorder=Recorder(m, cfg.physics),
        record_every=cfg.run.diagnostics_every,
    )
    write_diagnostics_csv(outdir / "diagnostics.csv", [r for _, r in record.entries])
    plots.render_simulation(record, last.state, outdir / "simulate.png")
    if not record.completed:
        raise IntegrationFailureError(record.failure, last.state)

    rows = np.array([[r.mass, r.energy, r.div_residual] for _, r in record.entries])
    final_t, final_rec = record.entries[-1]
    lines = [
        "experiment = simulate",
        f"steps = {int(round(cfg.run.t_end / cfg.stepper.dt))}",
        f"t_final = {_fmt(final_t)}",
        f"mass_initial = {_fmt(rows[0, 0])}",
        f"mass_drift_max = {_fmt(np.abs(rows[:, 0] - rows[0, 0]).max())}",
        f"energy_initial = {_fmt(rows[0, 1])}",
        f"energy_final = {_fmt(rows[-1, 1])}",
        f"energy_max_increment = {_fmt(max(np.diff(rows[:, 1]).max(), 0.0) if len(rows) > 1 else 0.0)}",
        f"div_residual_max = {_fmt(rows[:, 2].max())}",
        f"stationarity_final = {_fmt(final_rec.stationarity_residual)}",
    ]
    _write_report(outdir, lines)


def _run_steady(cfg: RunConfig, outdir: Path) -> None:
    exp = cfg.experiment
    tol = _get(exp, "experiment", "tol", float, 1e-8)
    max_time = _get(exp, "experiment", "max_time", float, 2000.0)
    dt_max = _get(exp, "experiment", "dt_max", float, 0.25)
    seed = build_initial_field(cfg)
    M = float(seed.values.mean())
    result = solve_stationary(M, seed, cfg.physics, tol, max_time, dt_max=dt_max)
    write_field(outdir / "steady.chdfield", result.phi, result.elapsed)
    meta = {
        "residual": result.residual,
        "E": result.energy,
        "M": result.mass,
        "iterations": result.steps,
    }
    (outdir / "steady.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    _write_report(outdir, ["experiment = steady"] + [f"{k} = {_fmt(v)}" for k, v in meta.items()])
    plots.render_steady(result, outdir / "steady.png")


def _run_rate(cfg: RunConfig, outdir: Path) -> None:
    exp = cfg.experiment
    fit_start = _get(exp, "experiment", "fit_start", float, 10.0)
    fit_end = _get(exp, "experiment", "fit_end", float, 200.0)
    n_samples = _get(exp, "experiment", "fit_samples", int, 25)
    target_tol = _get(exp, "experiment", "target_tol", float, 1e-9)
    if fit_end <= fit_start:
        raise ConfigError("experiment.fit_end", "must exceed fit_start")

    m = build_source(cfg)
    if not isinstance(m, SeparableDecaySource):
        raise ConfigError("source.variant", "rate experiment needs a separable-decay source")
    phi0 = build_initial_field(cfg)
    dt = cfg.stepper.dt
    sample_times = np.geomspace(fit_start, fit_end, n_samples)
    sample_steps = sorted(set(int(round(t / dt)) for t in sample_times))

    state = make_state(0.0, phi0, m, cfg.physics, cfg.stepper.dealias)
    kept = []
    from .stepper import step

    n_total = int(round(fit_end / dt))
    for i in range(1, n_total + 1):
        state = step(state, m, cfg.stepper, cfg.physics)
        if sample_steps and i == sample_steps[0]:
            sample_steps.pop(0)
            kept.append((state.t, state.phi))

    M = float(phi0.values.mean())
    target = solve_stationary(M, state.phi, cfg.physics, target_tol, max_time=500.0)
    g = cfg.grid
    times = [t for t, _ in kept]
    dists = [
        hminus1_seminorm(Field(g, phi.values - target.phi.values)) for _, phi in kept
    ]
    lam_hat, r2 = rate_fit(times, dists)

    csv_lines = ["t,dist_hm1"] + [f"{_fmt(t)},{_fmt(d)}" for t, d in zip(times, dists)]
    (outdir / "rate_distances.csv").write_text("\n".join(csv_lines) + "\n")
    rho = m.rho
    _write_report(outdir, [
        "experiment = rate",
        f"rho = {_fmt(rho)}",
        f"rho_over_2 = {_fmt(rho / 2)}",
        f"lambda_hat = {_fmt(lam_hat)}",
        f"r_squared = {_fmt(r2)}",
        f"target_residual = {_fmt(target.residual)}",
        f"samples = {len(times)}",
    ])
    plots.render_rate(times, dists, lam_hat, r2, outdir / "rate.png")


def _run_pullback(cfg: RunConfig, outdir: Path) -> None:
    exp = cfg.experiment
    back_times = exp.get("back_times", "5 10 20 40").split()
    t_star = _get(exp, "experiment", "t_star", float, 0.0)
    scalings = [float(v) for v in exp.get("scalings", "1 3 10").split()]
    m = build_source(cfg)
    phi0 = build_initial_field(cfg)
    report = pullback_probe(
        phi0, m, [float(b) for b in back_times], t_star, cfg.stepper, cfg.physics, scalings
    )
    lines = ["experiment = pullback", f"t_star = {_fmt(t_star)}"]
    for (a, b), d in zip(zip(report.back_times, report.back_times[1:]), report.pairwise_h2):
        lines.append(f"h2_distance_{a:g}_{b:g} = {_fmt(d)}")
    for s, h in zip(report.scalings, report.scaled_terminal_h1):
        lines.append(f"terminal_h1_scaling_{s:g} = {_fmt(h)}")
    lines.append(f"scaled_spread = {_fmt(report.scaled_spread())}")
    _write_report(outdir, lines)
    plots.render_pullback(report, outdir / "pullback.png")


def _run_dependence(cfg: RunConfig, outdir: Path) -> None:
    exp = cfg.experiment
    deltas = [float(v) for v in exp.get("deltas", "1e-2 1e-3 1e-4").split()]
    t_final = _get(exp, "experiment", "t", float, 1.0)
    dir_seed = _get(exp, "experiment", "direction_seed", int, 7)
    from .config import random_band_field

    m = build_source(cfg)
    phi0 = build_initial_field(cfg)
    direction = random_band_field(cfg.grid, dir_seed, 1.0, 0.5, 0.0, max_mode=12)
    report = continuous_dependence_probe(
        phi0, direction, deltas, m, cfg.stepper, cfg.physics, t_final
    )
    lines = ["experiment = dependence", f"t_final = {_fmt(t_final)}"]
    for e in report.entries:
        lines.append(f"amplification_{e.delta:g} = {_fmt(e.amplification)}")
        lines.append(f"dissipation_ratio_{e.delta:g} = {_fmt(e.dissipation_ratio)}")
    lines.append(f"max_spread = {_fmt(report.max_spread())}")
    _write_report(outdir, lines)
    plots.render_dependence(report, outdir / "dependence.png")


def _run_gronwall(cfg: RunConfig, outdir: Path) -> None:
    exp = cfg.experiment
    n_instances = _get(exp, "experiment", "instances", int, 200)
    n_max = _get(exp, "experiment", "n_max", int, 5)
    seed = _get(exp, "experiment", "seed", int, 12345)
    samples = _get(exp, "experiment", "samples", int, 160)
    reports = verify_ensemble(n_instances, seed=seed, n_max=n_max, samples=samples)
    lines = ["seed,n,gamma,max_ratio,pass"]
    for r in reports:
        lines.append(
            f"{r.instance_seed},{r.n},{_fmt(r.gamma)},{_fmt(r.max_ratio)},{int(r.passed and r.kernel_passed)}"
        )
    (outdir / "gronwall.csv").write_text("\n".join(lines) + "\n")
    n_fail = sum(1 for r in reports if not (r.passed and r.kernel_passed))
    _write_report(outdir, [
        "experiment = gronwall-verify",
        f"instances = {n_instances}",
        f"violations = {n_fail}",
        f"max_ratio = {_fmt(max(r.max_ratio for r in reports))}",
        f"kernel_max_ratio = {_fmt(max(r.kernel_max_ratio for r in reports))}",
    ])
    plots.render_gronwall(reports, outdir / "gronwall.png")
