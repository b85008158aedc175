"""Curve -> driving function: the unzipping (zipper) direction.

Curve points z_1, ..., z_n are conformally pulled down to the real line
one at a time: the image w_k of z_k under the maps fitted so far defines
the next elementary map h_k (its slit tip is w_k), and the accumulated
capacities and drive increments give the driving function samples
t_k = sum Delta_i, U_k = sum delta_i.

``extract_naive`` applies every fitted map to all remaining points
(O(N^2), vectorized).  ``extract_blocked`` additionally composes each
completed group of b maps into the truncated hat series of the block and
applies it in one stroke to every remaining point whose image clears the
gate |w| >= L * R_j, with R_j taken as the largest image modulus of the
block's own points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import _seriesbatch as sb
from .drivers import DrivingPath
from .hatseries import HatSeries, eval_via_hat, radius_inverse
from .slitmap import SlitKind, SlitMap, _h_interior, fit_slit

__all__ = [
    "CurveInput",
    "SanitizeReport",
    "SlitFitError",
    "sanitize",
    "extract_naive",
    "extract_blocked",
]

LIFT_ETA = 1e-9          # relative lift for points at or below the real axis
DUPLICATE_TOL = 1e-14    # consecutive points closer than this (relative) are dropped


class SlitFitError(RuntimeError):
    """Fitting an elementary map failed; carries the 1-based point index."""

    def __init__(self, index, cause):
        super().__init__(f"slit fit failed at point {index}: {cause}")
        self.index = index


@dataclass(frozen=True)
class SanitizeReport:
    lifted: tuple
    dropped: tuple
    eta: float
    scale: float

    @property
    def clean(self) -> bool:
        return not self.lifted and not self.dropped


@dataclass(frozen=True)
class CurveInput:
    """Curve points ready for extraction: z_0 = 0, Im z_k > 0 for k >= 1."""

    points: np.ndarray
    source: str = "unknown"
    report: SanitizeReport | None = None

    def __post_init__(self):
        z = np.asarray(self.points, dtype=complex)
        z.setflags(write=False)
        object.__setattr__(self, "points", z)

    def __len__(self) -> int:
        return len(self.points)


def sanitize(points, lift_eta: float = LIFT_ETA, source: str = "unknown") -> CurveInput:
    """Prepare raw curve points for unzipping.

    Points on or below the real axis (after the leading origin) are lifted
    to Im = lift_eta * scale; consecutive points closer than
    DUPLICATE_TOL * scale collapse to the earlier one.  Every modification
    is recorded in the attached report.
    """
    z = np.asarray(points, dtype=complex).copy()
    if z.ndim != 1 or z.size < 2:
        raise ValueError("need at least two curve points")
    scale = float(np.max(np.abs(z)))
    if scale == 0.0:
        raise ValueError("degenerate curve: all points at the origin")
    if abs(z[0]) > 1e-12 * scale:
        raise ValueError(f"curve must start at the origin, got {z[0]}")
    z[0] = 0.0

    lifted = []
    for k in range(1, len(z)):
        if z[k].imag <= 0.0:
            z[k] = complex(z[k].real, lift_eta * scale)
            lifted.append(k)

    keep = np.ones(len(z), dtype=bool)
    last = z[0]
    dropped = []
    for k in range(1, len(z)):
        if abs(z[k] - last) <= DUPLICATE_TOL * scale:
            keep[k] = False
            dropped.append(k)
        else:
            last = z[k]
    z = z[keep]
    if len(z) < 2:
        raise ValueError("fewer than two distinct points remain after sanitation")
    report = SanitizeReport(tuple(lifted), tuple(dropped), lift_eta, scale)
    return CurveInput(z, source=source, report=report)


def _fit_next(w: complex, kind: SlitKind, index: int, scale: float,
              lifts: list) -> SlitMap:
    if w.imag <= 0.0:
        # numerical noise can push an image onto the axis; lift and record
        w = complex(w.real, LIFT_ETA * max(scale, abs(w)))
        lifts.append(index)
    try:
        return fit_slit(w, kind)
    except (ValueError, ArithmeticError) as exc:
        raise SlitFitError(index, exc) from exc


def extract_naive(curve: CurveInput, kind: SlitKind | str = SlitKind.VERTICAL) -> DrivingPath:
    """Sequential unzipping with full map application; O(N^2).

    Returns the driving path on the accumulated capacity grid; indices of
    images that needed lifting are reported in path.meta["lifted_steps"].
    """
    kind = SlitKind(kind)
    w = np.array(curve.points[1:], dtype=complex)
    n = len(w)
    scale = float(np.max(np.abs(w)))
    if kind == SlitKind.VERTICAL and _kernels.HAVE_NUMBA:
        Deltas, deltas, lifted = _kernels.vert_extract_naive(
            np.ascontiguousarray(w), LIFT_ETA * scale)
        lifts = [int(i) for i in lifted]
    else:
        Deltas = np.empty(n)
        deltas = np.empty(n)
        lifts = []
        for k in range(n):
            m = _fit_next(complex(w[k]), kind, k + 1, scale, lifts)
            Deltas[k] = m.capacity_half
            deltas[k] = m.drive_increment
            if k + 1 < n:
                w[k + 1:] = _h_interior(m, w[k + 1:])
    times = np.concatenate([[0.0], np.cumsum(Deltas)])
    values = np.concatenate([[0.0], np.cumsum(deltas)])
    return DrivingPath(times, values, meta={"kind": kind.value,
                                            "lifted_steps": lifts})


def extract_blocked(curve: CurveInput, kind: SlitKind | str = SlitKind.VERTICAL,
                    block_size: int | None = None, n: int = 12,
                    gate: float = 4.0) -> DrivingPath:
    """Block-accelerated unzipping; matches extract_naive to the series
    tolerance and is bitwise-identical for block_size=1 with an infinite gate.
    """
    kind = SlitKind(kind)
    w = np.array(curve.points[1:], dtype=complex)
    N = len(w)
    b = max(1, math.ceil(math.sqrt(N))) if block_size is None else int(block_size)
    scale = float(np.max(np.abs(w)))
    if kind == SlitKind.VERTICAL and _kernels.HAVE_NUMBA:
        Deltas, deltas, lifted = _kernels.vert_extract_blocked(
            np.ascontiguousarray(w), b, n, float(gate), LIFT_ETA * scale)
        times = np.concatenate([[0.0], np.cumsum(Deltas)])
        values = np.concatenate([[0.0], np.cumsum(deltas)])
        return DrivingPath(times, values,
                           meta={"kind": kind.value, "block_size": b, "order": n,
                                 "gate": gate, "lifted_steps": [int(i) for i in lifted]})
    Deltas = np.empty(N)
    deltas = np.empty(N)
    lifts: list = []
    for lo in range(0, N, b):
        hi = min(lo + b, N)
        # block radius from the images of its own points under the prefix,
        # taken before any of this block's maps act
        radius = radius_inverse(w[lo:hi])
        maps = []
        for k in range(lo, hi):
            m = _fit_next(complex(w[k]), kind, k + 1, scale, lifts)
            Deltas[k] = m.capacity_half
            deltas[k] = m.drive_increment
            maps.append(m)
            if k + 1 < hi:
                w[k + 1: hi] = _h_interior(m, w[k + 1: hi])
        if hi >= N:
            break
        # hat series of H_j = h_{hi} o ... o h_{lo+1}: member hhat rows,
        # outermost (last fitted) first, folded by the batched tree
        if kind == SlitKind.VERTICAL:
            rows = sb.batch_hat_vertical_h(deltas[lo:hi], Deltas[lo:hi], n)
        else:
            rows = sb.batch_hat_tilted_h(np.array([m.angle for m in maps]),
                                         np.array([m.x_left for m in maps]),
                                         np.array([m.x_right for m in maps]), n)
        series = HatSeries(sb.compose_chain(rows[::-1][None, :, :])[0], radius)
        tail = w[hi:]
        gated = np.abs(tail) >= gate * radius
        if gated.any():
            tail[gated] = eval_via_hat(series, tail[gated])
        if not gated.all():
            sub = tail[~gated]
            for m in maps:
                sub = _h_interior(m, sub)
            tail[~gated] = sub
    times = np.concatenate([[0.0], np.cumsum(Deltas)])
    values = np.concatenate([[0.0], np.cumsum(deltas)])
    return DrivingPath(times, values, meta={"kind": kind.value, "block_size": b,
                                            "order": n, "gate": gate,
                                            "lifted_steps": lifts})