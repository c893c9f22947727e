"""Figure rendering for the experiment report path (PNG next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_simulation(record, state, path):
    ts = [t for t, _ in record.entries]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    axes[0].plot(ts, [r.energy for _, r in record.entries])
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("free energy")
    drift = np.array([r.mass for _, r in record.entries])
    axes[1].plot(ts, drift - drift[0])
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("mass drift")
    im = axes[2].imshow(
        state.phi.values.T,
        origin="lower",
        extent=(0, state.grid.lx, 0, state.grid.ly),
        cmap="RdBu_r",
    )
    axes[2].set_title(f"phi at t = {state.t:.3g}")
    fig.colorbar(im, ax=axes[2])
    _save(fig, path)


def render_steady(result, path):
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    g = result.phi.grid
    im = ax.imshow(result.phi.values.T, origin="lower", extent=(0, g.lx, 0, g.ly), cmap="RdBu_r")
    ax.set_title(f"steady state, residual {result.residual:.2e}")
    fig.colorbar(im, ax=ax)
    _save(fig, path)


def render_rate(times, distances, lambda_hat, r2, path):
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.loglog(1.0 + np.asarray(times), distances, "o", ms=4, label="measured")
    ref = distances[0] * ((1.0 + np.asarray(times)) / (1.0 + times[0])) ** (-lambda_hat)
    ax.loglog(1.0 + np.asarray(times), ref, "-", label=f"slope {-lambda_hat:.3f}, R2={r2:.4f}")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("distance to steady state (dual norm)")
    ax.legend()
    _save(fig, path)


def render_pullback(report, path):
    fig, axes = plt.subplots(1, 2, figsize=(8.6, 3.4))
    pairs = [f"{a:g}-{b:g}" for a, b in zip(report.back_times, report.back_times[1:])]
    axes[0].semilogy(pairs, report.pairwise_h2, "o-")
    axes[0].set_xlabel("back-time pair")
    axes[0].set_ylabel("H2 distance at t*")
    axes[1].bar([str(s) for s in report.scalings], report.scaled_terminal_h1)
    axes[1].set_xlabel("initial fluctuation scaling")
    axes[1].set_ylabel("terminal H1 norm")
    _save(fig, path)


def render_dependence(report, path):
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    deltas = [e.delta for e in report.entries]
    ax.semilogx(deltas, [e.amplification for e in report.entries], "o-")
    ax.set_xlabel("perturbation size delta")
    ax.set_ylabel("H1 amplification at T")
    _save(fig, path)


def render_gronwall(reports, path):
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.hist([r.max_ratio for r in reports], bins=30)
    ax.axvline(1.0, color="r", ls="--", label="bound")
    ax.set_xlabel("max y / bound over samples")
    ax.set_ylabel("instances")
    ax.legend()
    _save(fig, path)
