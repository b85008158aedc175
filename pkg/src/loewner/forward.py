"""Driving function -> trace: composed slit-map evaluation.

Points on the generated curve are z_k = f_1 o f_2 o ... o f_k(0) where
f_i is the elementary slit map built from the path increments
(delta_i, Delta_i).  ``solve_naive`` evaluates every point through the
full nested composition (O(N^2) map applications, vectorized over the
points).  ``solve_blocked`` groups the maps into blocks of b, replaces a
block by the truncated power series of its hat transform whenever the
argument clears the gate |z| >= L * R_j, and falls back to the nested
member maps otherwise.  ``point_at`` evaluates a single curve point from
a prebuilt BlockPlan.  ``sle_adaptive`` samples scaled Brownian motion
and refines the time partition by bisection with Brownian-bridge fills
until consecutive curve points are closer than a spatial resolution eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .drivers import BridgeStream, DrivingPath, bridge_midpoint, brownian_driver
from .hatseries import BlockPlan, build_forward_plan, eval_via_hat
from .slitmap import (SlitKind, SlitMap, _f_interior, make_tilted,
                      make_vertical, tip)

__all__ = [
    "Trace",
    "build_maps",
    "solve_naive",
    "solve_blocked",
    "point_at",
    "sle_adaptive",
    "default_block_size",
]

ADAPTIVE_MAX_ROUNDS = 24
ADAPTIVE_MAX_POINTS = 2_000_000
ADAPTIVE_INITIAL_POINTS = 64


@dataclass(frozen=True)
class Trace:
    """Sampled curve {(t_k, z_k)} in the closed upper half-plane, z_0 = 0."""

    times: np.ndarray
    points: np.ndarray
    slit_kind: SlitKind
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        z = np.asarray(self.points, dtype=complex)
        if t.shape != z.shape or t.ndim != 1:
            raise ValueError("times and points must be 1-d arrays of equal length")
        if z[0] != 0:
            raise ValueError("trace must start at the origin")
        t.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", z)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def gaps(self) -> np.ndarray:
        """|z_k - z_{k-1}| including the first segment from the origin."""
        return np.abs(np.diff(self.points))

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal of the points; the trace's size scale."""
        re, im = self.points.real, self.points.imag
        return float(np.hypot(re.max() - re.min(), im.max() - im.min()))


def default_block_size(n_maps: int) -> int:
    """b = ceil(sqrt(N)), the cost-balancing choice."""
    return max(1, math.ceil(math.sqrt(max(n_maps, 1))))


def build_maps(driving: DrivingPath, kind: SlitKind | str) -> list[SlitMap]:
    """Elementary maps for each path increment (delta_k, Delta_k)."""
    kind = SlitKind(kind)
    ds = driving.drive_steps
    Ds = driving.capacity_steps
    if kind == SlitKind.VERTICAL:
        return [make_vertical(d, D) for d, D in zip(ds, Ds)]
    return [make_tilted(d, D) for d, D in zip(ds, Ds)]


def _clamp_upper(z: np.ndarray) -> np.ndarray:
    # rounding can push essentially-real points a few ulp below the axis
    return np.where(z.imag < 0.0, z.real + 0j, z)


def solve_naive(driving: DrivingPath, kind: SlitKind | str = SlitKind.VERTICAL) -> Trace:
    """Full nested composition; O(N^2) map applications.

    The loop runs over maps from the innermost out, carrying all later
    points as one vector, so point k receives exactly f_k, f_{k-1}, ..., f_1.
    Vertical solves go through the fused kernel when numba is available.
    """
    kind = SlitKind(kind)
    if kind == SlitKind.VERTICAL and _kernels.HAVE_NUMBA:
        out = _kernels.vert_solve_naive(np.ascontiguousarray(driving.drive_steps),
                                        np.ascontiguousarray(driving.capacity_steps))
        return Trace(driving.times.copy(), _clamp_upper(out), kind,
                     meta={"solver": "naive"})
    maps = build_maps(driving, kind)
    n = len(maps)
    out = np.zeros(n + 1, dtype=complex)
    for i in range(n, 0, -1):
        m = maps[i - 1]
        out[i + 1:] = _f_interior(m, out[i + 1:])
        out[i] = tip(m)
    return Trace(driving.times.copy(), _clamp_upper(out), kind,
                 meta={"solver": "naive"})


def _apply_block(plan: BlockPlan, j: int, w: np.ndarray) -> np.ndarray:
    """Apply block j (1-based) to a vector, honoring the series gate."""
    blk = plan.blocks[j - 1]
    gated = np.abs(w) >= plan.gate * blk.radius
    out = np.empty_like(w)
    if gated.any():
        out[gated] = eval_via_hat(blk.series, w[gated])
    if not gated.all():
        sub = w[~gated]
        for mi in range(blk.stop - 1, blk.start - 1, -1):
            sub = _f_interior(plan.maps[mi], sub)
        out[~gated] = sub
    return out


def solve_blocked(driving: DrivingPath, kind: SlitKind | str = SlitKind.VERTICAL,
                  block_size: int | None = None, n: int = 12, gate: float = 4.0,
                  plan: BlockPlan | None = None) -> Trace:
    """Block-accelerated composition; same trace as solve_naive up to the
    series tolerance.

    Point k = m*b + l first receives its l tail maps by nested evaluation,
    then blocks F_m ... F_1, each through the hat series when the argument
    clears the gate.  With block_size=1 and an infinite gate the arithmetic
    is identical to solve_naive.
    """
    kind = SlitKind(kind)
    N = len(driving) - 1
    b = default_block_size(N) if block_size is None else int(block_size)
    if kind == SlitKind.VERTICAL and _kernels.HAVE_NUMBA and plan is None:
        ds = np.ascontiguousarray(driving.drive_steps)
        Ds = np.ascontiguousarray(driving.capacity_steps)
        coeffs, radii = _forward_plan_arrays(ds, Ds, b, n)
        out = _kernels.vert_solve_blocked(ds, Ds, coeffs, radii, b, float(gate))
        return Trace(driving.times.copy(), _clamp_upper(out), kind,
                     meta={"solver": "blocked", "block_size": b, "order": n,
                           "gate": float(gate)})
    maps = build_maps(driving, kind)
    if plan is None:
        plan = build_forward_plan(maps, b, n, gate)
    out = np.zeros(N + 1, dtype=complex)
    # tail phase: triangular nested evaluation within each block interval
    for lo in range(0, N, b):
        hi = min(lo + b, N)
        for i in range(hi, lo, -1):
            m = maps[i - 1]
            out[i + 1: hi + 1] = _f_interior(m, out[i + 1: hi + 1])
            out[i] = tip(m)
    # block phase: point k still needs blocks floor((k-1)/b) ... 1
    for j in range((N - 1) // b, 0, -1):
        out[j * b + 1:] = _apply_block(plan, j, out[j * b + 1:])
    return Trace(driving.times.copy(), _clamp_upper(out), kind,
                 meta={"solver": "blocked", "block_size": b, "order": n,
                       "gate": plan.gate})


def _forward_plan_arrays(ds, Ds, b, n):
    """Composed hat rows and radii of the full blocks, as plain arrays."""
    from . import _seriesbatch as sb

    nfull = (len(ds) // b) * b
    if nfull == 0:
        return np.zeros((0, n + 1)), np.zeros(0)
    hats = sb.batch_hat_vertical_f(ds[:nfull], Ds[:nfull], n)
    coeffs = sb.compose_chain(hats.reshape(nfull // b, b, n + 1))
    radii = np.array(sb.vertical_radii_forward(ds, Ds, b))
    return np.ascontiguousarray(coeffs), radii


def point_at(driving: DrivingPath, k: int, plan: BlockPlan) -> complex:
    """Single curve point z_k from a prebuilt plan; sublinear in N per call."""
    N = len(plan.maps)
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, {N}], got {k}")
    m_full = (k - 1) // plan.block_size
    w = tip(plan.maps[k - 1])
    for i in range(k - 1, m_full * plan.block_size, -1):
        w = complex(_f_interior(plan.maps[i - 1], w))
    for j in range(m_full, 0, -1):
        blk = plan.blocks[j - 1]
        if abs(w) >= plan.gate * blk.radius:
            w = complex(eval_via_hat(blk.series, w))
        else:
            for mi in range(blk.stop - 1, blk.start - 1, -1):
                w = complex(_f_interior(plan.maps[mi], w))
    return complex(w) if w.imag >= 0 else complex(w.real)


def sle_adaptive(kappa: float, total_time: float, eps: float | None, seed: int,
                 kind: SlitKind | str = SlitKind.VERTICAL,
                 initial_points: int = ADAPTIVE_INITIAL_POINTS,
                 max_rounds: int = ADAPTIVE_MAX_ROUNDS,
                 max_points: int = ADAPTIVE_MAX_POINTS,
                 solver: str = "auto") -> tuple[DrivingPath, Trace]:
    """Sample SLE(kappa) on [0, total_time] with adaptive capacity steps.

    Starts from a uniform partition, then repeatedly recomputes the whole
    trace and bisects every interval whose curve gap exceeds eps, drawing
    the midpoint driving value from a Brownian bridge.  On normal
    termination every gap satisfies |z_k - z_{k-1}| <= eps.  Hitting the
    round or point cap returns the partial result flagged non-compliant
    in the trace meta.

    ``solver`` picks how each round recomputes the trace: "naive",
    "blocked" (block plan rebuilt every round), or "auto", which switches
    to blocked once the path outgrows the naive sweep.
    """
    if eps is None:
        eps = 0.01 * math.sqrt(2.0 * total_time)
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if initial_points < 2:
        raise ValueError("need at least 2 initial points")
    if solver not in ("auto", "naive", "blocked"):
        raise ValueError(f"unknown solver {solver!r}")
    kind = SlitKind(kind)
    times = np.linspace(0.0, total_time, initial_points + 1)
    path = brownian_driver(kappa, times, seed)
    stream = BridgeStream(seed)
    rounds = 0
    compliant = False
    while True:
        use_blocked = solver == "blocked" or (solver == "auto" and len(path) > 4096)
        trace = solve_blocked(path, kind) if use_blocked else solve_naive(path, kind)
        bad = trace.gaps > eps
        if not bad.any():
            compliant = True
            break
        if rounds >= max_rounds or len(path) + int(bad.sum()) > max_points:
            break
        t, u = path.times, path.values
        idx = np.nonzero(bad)[0]  # interval k: (t_k, t_{k+1})
        mid_t = 0.5 * (t[idx] + t[idx + 1])
        # an interval at the resolution of double precision cannot be split
        splittable = (mid_t > t[idx]) & (mid_t < t[idx + 1])
        if not splittable.any():
            break
        idx = idx[splittable]
        mid_t = mid_t[splittable]
        mid_u = np.array([
            bridge_midpoint(u[i], u[i + 1], t[i], t[i + 1], kappa, stream)
            for i in idx
        ])
        new_t = np.insert(t, idx + 1, mid_t)
        new_u = np.insert(u, idx + 1, mid_u)
        path = DrivingPath(new_t, new_u, kappa_hint=path.kappa_hint)
        rounds += 1
    meta = {"kappa": float(kappa), "eps": float(eps), "seed": int(seed),
            "kind": kind.value, "rounds": rounds, "n_points": len(trace),
            "compliant": compliant, "initial_points": initial_points,
            "total_time": float(total_time)}
    trace = Trace(trace.times, trace.points, kind, meta=meta)
    return path, trace
