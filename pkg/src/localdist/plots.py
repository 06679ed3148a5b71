"""Figure rendering for the CLI report paths.

Every function writes a PNG next to the delimited output and returns the
path.  The Agg backend is forced so the CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_scan_plot", "save_bench_plot", "save_trace_plot"]


def save_scan_plot(rows, path, title: str = "") -> str:
    """Distance against gamma from scan rows (gamma, distance, ...)."""
    gammas = [r[0] for r in rows]
    dists = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(gammas, dists, marker="o", lw=1.2)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel("distance")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_bench_plot(rows, path, title: str = "") -> str:
    """Log-log runtime against M from bench rows (M, millis, ...).

    A dashed M^6 guide is anchored at the first data point for eyeballing
    the power law.
    """
    Ms = np.array([r[0] for r in rows], dtype=float)
    ms = np.array([r[1] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(Ms, ms, marker="o", lw=1.2, label="measured")
    if len(Ms) >= 2 and ms[0] > 0:
        guide = ms[0] * (Ms / Ms[0]) ** 6
        ax.loglog(Ms, guide, ls="--", color="0.5", lw=1.0, label=r"$M^6$ guide")
    ax.set_xlabel("measurements per party M")
    ax.set_ylabel("solver time [ms]")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_trace_plot(trace, path, title: str = "") -> str:
    """Convergence of the bounds over outer iterations of one solve."""
    iters = [r.iter for r in trace]
    f_plus = [r.f_plus for r in trace]
    gaps = [max(r.gap, 0.0) for r in trace]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(iters, np.maximum(f_plus, 1e-300), marker="o", ms=3, lw=1.0,
                label=r"$F^{+}$")
    ax.semilogy(iters, np.maximum(gaps, 1e-300), marker="s", ms=3, lw=1.0,
                label="gap")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
