"""Driving-process diagnostics: variance-slope estimation of kappa and
Brownian-motion hypothesis checks.

For scaled Brownian driving, Var U_t = kappa * t exactly, so kappa is
estimated by a zero-intercept regression of the ensemble variance on time
(weighted by t, damping the noisy small-t ratios).  Path-level bootstrap
gives the standard error.  The hypothesis checks standardize increments by
sqrt(kappa_hat * Delta_k) and look at lag-1 autocorrelation, skewness,
excess kurtosis and the one-sample Kolmogorov-Smirnov distance from the
standard normal.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as sps

from .drivers import DrivingPath

__all__ = [
    "KappaReport",
    "BmDiagnostics",
    "resample_to_grid",
    "uniform_grid",
    "estimate_kappa",
    "bm_diagnostics",
]

BOOTSTRAP_DEFAULT = 200


@dataclass(frozen=True)
class BmDiagnostics:
    lag1_autocorr: float
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_pvalue: float
    n_increments: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KappaReport:
    kappa_hat: float
    stderr: float
    r_squared: float
    n_paths: int
    n_times: int
    diagnostics: BmDiagnostics | None
    degenerate: bool = False

    def __post_init__(self):
        if self.kappa_hat < 0 or not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("kappa_hat must be >= 0 and r_squared in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.diagnostics is not None:
            d["diagnostics"] = self.diagnostics.to_dict()
        return d


def uniform_grid(paths, n_times: int) -> np.ndarray:
    """Uniform time grid on [0, T] with T the shortest final time."""
    t_end = min(float(p.times[-1]) for p in paths)
    return np.linspace(0.0, t_end, n_times + 1)


def resample_to_grid(path: DrivingPath, grid) -> np.ndarray:
    """Linear interpolation of the driving values onto a common grid."""
    return np.interp(np.asarray(grid, dtype=float), path.times, path.values)


def _kappa_slope(values: np.ndarray, t: np.ndarray) -> tuple[float, np.ndarray]:
    # zero-intercept weighted least squares of Var(U_t) on t, weights w = t
    var = np.var(values, axis=0, ddof=1)
    num = float(np.sum(t * t * var))
    den = float(np.sum(t ** 3))
    return num / den, var


def estimate_kappa(paths, grid=None, n_times: int = 100,
                   bootstrap: int = BOOTSTRAP_DEFAULT, seed: int = 0) -> KappaReport:
    """Estimate kappa from an ensemble of driving paths.

    Paths are resampled to a shared grid; kappa_hat is the slope of the
    zero-intercept fit of the ensemble variance on time, its stderr comes
    from resampling whole paths with replacement.
    """
    paths = list(paths)
    if len(paths) < 2:
        raise ValueError("need at least two paths")
    if grid is None:
        grid = uniform_grid(paths, n_times)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValueError("empty grid")
    t = grid[1:]
    values = np.stack([resample_to_grid(p, grid)[1:] for p in paths])
    kappa_hat, var = _kappa_slope(values, t)
    kappa_hat = max(kappa_hat, 0.0)

    ss_tot = float(np.sum((var - var.mean()) ** 2))
    degenerate = ss_tot == 0.0
    if degenerate:
        r2 = 0.0
    else:
        r2 = 1.0 - float(np.sum((var - kappa_hat * t) ** 2)) / ss_tot
        r2 = min(max(r2, 0.0), 1.0)

    rng = np.random.default_rng(np.random.SeedSequence([0x5B00, int(seed)]))
    boots = np.empty(bootstrap)
    for i in range(bootstrap):
        pick = rng.integers(0, len(paths), len(paths))
        boots[i] = max(_kappa_slope(values[pick], t)[0], 0.0)
    stderr = float(np.std(boots, ddof=1))

    diag = None
    if kappa_hat > 0:
        diag = bm_diagnostics(paths, grid, kappa=kappa_hat)
    return KappaReport(float(kappa_hat), stderr, float(r2), len(paths),
                       int(grid.size), diag, degenerate)


def bm_diagnostics(paths, grid=None, kappa: float | None = None,
                   n_times: int = 100) -> BmDiagnostics:
    """Brownian-motion checks on standardized increments of an ensemble."""
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one path")
    if grid is None:
        grid = uniform_grid(paths, n_times)
    grid = np.asarray(grid, dtype=float)
    if kappa is None:
        vals = np.stack([resample_to_grid(p, grid)[1:] for p in paths])
        kappa = max(_kappa_slope(vals, grid[1:])[0], 0.0)
    if not kappa > 0:
        raise ValueError("kappa must be positive to standardize increments")
    dt = np.diff(grid)
    incr = np.stack([np.diff(resample_to_grid(p, grid)) for p in paths])
    x = incr / np.sqrt(kappa * dt)
    flat = x.ravel()
    centered = x - flat.mean()
    denom = float(np.sum(centered * centered))
    lag1 = float(np.sum(centered[:, 1:] * centered[:, :-1]) / denom)
    ks = sps.kstest(flat, "norm")
    return BmDiagnostics(
        lag1_autocorr=lag1,
        skewness=float(sps.skew(flat)),
        excess_kurtosis=float(sps.kurtosis(flat)),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        n_increments=flat.size,
    )
