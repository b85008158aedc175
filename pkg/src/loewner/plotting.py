"""Figure rendering for the command-line reports.

Every CLI command that writes delimited output can also render a PNG next
to it: traces as curves in the half-plane, driving functions as time
series, the kappa fit as variance-vs-time with the fitted slope, and the
benchmark as log-log cost curves with their fitted exponents.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_trace",
    "plot_driving",
    "plot_kappa_fit",
    "plot_bench",
]

_DPI = 150


def _finish(fig, out_png):
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI)
    plt.close(fig)
    return out_png


def plot_trace(points, out_png, title=None, compare=None, labels=("trace", "other")):
    """Curve in the half-plane; optionally overlay a second point set."""
    pts = np.asarray(points, dtype=complex)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(pts.real, pts.imag, lw=0.7, label=labels[0] if compare is not None else None)
    if compare is not None:
        cmp_pts = np.asarray(compare, dtype=complex)
        ax.plot(cmp_pts.real, cmp_pts.imag, lw=0.7, alpha=0.7, label=labels[1])
        ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title, fontsize=10)
    return _finish(fig, out_png)


def plot_driving(times, values, out_png, title=None, compare=None,
                 labels=("driving", "other")):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(times, values, lw=0.8, label=labels[0] if compare is not None else None)
    if compare is not None:
        ct, cv = compare
        ax.plot(ct, cv, lw=0.8, alpha=0.7, label=labels[1])
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("capacity time t")
    ax.set_ylabel("U(t)")
    if title:
        ax.set_title(title, fontsize=10)
    return _finish(fig, out_png)


def plot_kappa_fit(grid, variances, kappa_hat, out_png, title=None):
    g = np.asarray(grid, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(g, variances, ".", ms=3, label="ensemble Var U(t)")
    ax.plot(g, kappa_hat * g, "-", lw=1.2,
            label=f"fit: {kappa_hat:.4g} t")
    ax.set_xlabel("capacity time t")
    ax.set_ylabel("Var U(t)")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    return _finish(fig, out_png)


def plot_bench(result: dict, out_png):
    """Log-log cost curves with fitted slopes from a benchmark record."""
    series = result.get("timings", {})
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name, rec in series.items():
        sizes = np.asarray(rec["sizes"], dtype=float)
        secs = np.asarray(rec["seconds"], dtype=float)
        slope = result.get("slopes", {}).get(name)
        label = name if slope is None else f"{name} (slope {slope:.2f})"
        ax.loglog(sizes, secs, "o-", ms=4, lw=1, label=label)
    ax.set_xlabel("N")
    ax.set_ylabel("seconds")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("cost scaling", fontsize=10)
    return _finish(fig, out_png)
