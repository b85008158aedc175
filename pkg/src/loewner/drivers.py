"""Driving-function generators: scaled Brownian motion, random walks,
Brownian-bridge refinement draws, and deterministic drivers.

All paths are sampled in capacity time (hull capacity C(t) = 2t) on a
strictly increasing grid starting at t_0 = 0 with U_0 = 0.  Generation is
deterministic given (seed, parameters).  Bridge draws used by adaptive
refinement are keyed by the bit patterns of the interval endpoints, so a
refinement pass reuses identical samples no matter in which order or in
which round intervals get bisected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DrivingPath",
    "BridgeStream",
    "brownian_driver",
    "walk_driver",
    "bridge_midpoint",
    "sqrt_driver",
    "constant_driver",
    "from_samples",
]

_BRIDGE_TAG = 0x1B2D  # domain separator vs. the initial-path stream


@dataclass(frozen=True)
class DrivingPath:
    """Sampled driving function {(t_k, U_k)} in capacity time."""

    times: np.ndarray
    values: np.ndarray
    kappa_hint: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        u = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != u.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size < 1 or t[0] != 0.0 or u[0] != 0.0:
            raise ValueError("path must start at (t, U) = (0, 0)")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", u)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def capacity_steps(self) -> np.ndarray:
        """Delta_k = t_k - t_{k-1}."""
        return np.diff(self.times)

    @property
    def drive_steps(self) -> np.ndarray:
        """delta_k = U_k - U_{k-1}."""
        return np.diff(self.values)


def brownian_driver(kappa: float, times, seed: int) -> DrivingPath:
    """Driving path with independent increments N(0, kappa * Delta_k).

    Restricted to the sample times this has exactly the law of
    sqrt(kappa) * B_t.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    t = np.asarray(times, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    incr = rng.normal(0.0, np.sqrt(kappa * np.diff(t)))
    u = np.concatenate([[0.0], np.cumsum(incr)])
    return DrivingPath(t, u, kappa_hint=float(kappa))


def walk_driver(kappa: float, n_steps: int, Delta: float, seed: int) -> DrivingPath:
    """Simple-random-walk driver: uniform partition, increments +-sqrt(kappa*Delta)."""
    if n_steps < 1:
        raise ValueError(f"need n_steps >= 1, got {n_steps}")
    if not Delta > 0:
        raise ValueError(f"Delta must be > 0, got {Delta}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    signs = rng.integers(0, 2, n_steps) * 2 - 1
    step = np.sqrt(kappa * Delta)
    t = Delta * np.arange(n_steps + 1, dtype=float)
    u = np.concatenate([[0.0], np.cumsum(signs * step)])
    return DrivingPath(t, u, kappa_hint=float(kappa))


class BridgeStream:
    """Reproducible source of standard normals keyed by time intervals.

    The draw for an interval depends only on the master seed and the bit
    patterns of (t_a, t_b); the bisection level is implied by the endpoints.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def standard_normal(self, t_a: float, t_b: float) -> float:
        key = (np.float64(t_a).view(np.uint64), np.float64(t_b).view(np.uint64))
        ss = np.random.SeedSequence([_BRIDGE_TAG, self.seed, int(key[0]), int(key[1])])
        return float(np.random.default_rng(ss).standard_normal())


def bridge_midpoint(u_a: float, u_b: float, t_a: float, t_b: float,
                    kappa: float, stream: BridgeStream) -> float:
    """Sample the driving value at (t_a + t_b)/2 given the endpoint values.

    Conditioning Brownian motion on its endpoints makes the midpoint normal
    with mean (u_a + u_b)/2 and variance kappa*(t_b - t_a)/4.
    """
    if not t_a < t_b:
        raise ValueError("need t_a < t_b")
    mean = 0.5 * (u_a + u_b)
    std = np.sqrt(kappa * (t_b - t_a)) / 2.0
    return mean + std * stream.standard_normal(t_a, t_b)


def sqrt_driver(c: float, times) -> DrivingPath:
    """Deterministic driver U_t = c*sqrt(t); generates a straight tilted slit."""
    t = np.asarray(times, dtype=float)
    return DrivingPath(t, c * np.sqrt(t))


def constant_driver(delta: float, times) -> DrivingPath:
    """Driver jumping to the constant delta for t > 0 (U_0 = 0)."""
    t = np.asarray(times, dtype=float)
    u = np.full_like(t, float(delta))
    u[0] = 0.0
    return DrivingPath(t, u)


def from_samples(pairs) -> DrivingPath:
    """Build a path from (t, u) samples, e.g. read back from CSV."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an iterable of (t, u) pairs")
    return DrivingPath(arr[:, 0], arr[:, 1])
