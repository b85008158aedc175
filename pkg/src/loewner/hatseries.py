"""Truncated power series of hat transforms and block composition.

For a conformal map ``f`` fixing infinity with derivative 1 there, the hat
transform ``fhat(z) = 1/f(1/z)`` is analytic near 0 with ``fhat(0) = 0``
and ``fhat'(0) = 1``, and hat transforms compose exactly:
``(f o g)^ = fhat o ghat``.  Truncating every hat series at a fixed order
``n`` turns the expensive nested evaluation of a block of slit maps into a
single polynomial evaluation, valid once the argument clears the series'
domain of convergence with a safety factor ``L``.

Closed forms used for the elementary maps (capacity ``Delta``, drive
``delta``, footprint ``[-x_l, x_r]``):

* vertical, growing direction:   ``fhat(z) = z / (delta*z + sqrt(1 - 4*Delta*z^2))``
* vertical, unzipping direction: ``hhat(z) = z * ((1 - delta*z)^2 + 4*Delta*z^2)^(-1/2)``
* tilted, growing direction:     ``fhat(z) = z * (1 + x_r*z)^(alpha-1) * (1 - x_l*z)^(-alpha)``
* tilted, unzipping direction:   series reversion of the growing direction.

The series ``fhat`` converges on ``|z| < 1/R`` where ``R`` is the largest
modulus of a singularity of ``1/f(1/z)``: the outermost real branch point
of ``f`` or, when the slit is not attached at the origin, the real point
where ``f`` vanishes.  ``radius_forward`` locates both exactly for a block
by pulling interval endpoints and the zero preimage back through the
elementary inverses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .slitmap import SlitKind, SlitMap, apply_f, apply_h, tip

__all__ = [
    "HatDirection",
    "HatSeries",
    "Block",
    "BlockPlan",
    "GateError",
    "identity_series",
    "hat_of_map",
    "compose",
    "revert",
    "eval_via_hat",
    "radius_forward",
    "radius_inverse",
    "build_forward_plan",
]

DEFAULT_ORDER = 12
DEFAULT_GATE = 4.0


class HatDirection(str, enum.Enum):
    """Which family of elementary maps the series represents."""

    F_OF_FORWARD = "f"   # slit-growing maps f, composed by the forward solver
    H_OF_INVERSE = "h"   # unzipping maps h, composed by the inverse solver


class GateError(RuntimeError):
    """eval_via_hat was called with an argument the gate should have rejected."""


@dataclass(frozen=True)
class HatSeries:
    """Coefficients a_0..a_n of a truncated hat series; a_0 = 0, a_1 = 1.

    ``radius_inv_domain`` is R > 0: the series converges for |z| < 1/R, so
    the represented map is series-evaluable for arguments |z| > R.
    """

    coeffs: np.ndarray
    radius_inv_domain: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if c[0] != 0.0 or c[1] != 1.0:
            raise ValueError("hat series must have a_0 = 0 and a_1 = 1")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def with_radius(self, radius: float) -> "HatSeries":
        return HatSeries(self.coeffs, float(radius))


def identity_series(n: int = DEFAULT_ORDER) -> HatSeries:
    c = np.zeros(n + 1)
    c[1] = 1.0
    return HatSeries(c, 0.0)


# ---------------------------------------------------------------------------
# coefficient kernels

def _mul_trunc(a, b, n):
    return np.convolve(a, b)[: n + 1]


def _binom_coeffs(p, c, n):
    """(1 + c*z)^p truncated at z^n."""
    out = np.zeros(n + 1)
    out[0] = 1.0
    for m in range(1, n + 1):
        out[m] = out[m - 1] * c * (p - m + 1) / m
    return out


def _recip_coeffs(a, n):
    """1/A(z) truncated at z^n; requires a_0 = 1."""
    out = np.zeros(n + 1)
    out[0] = 1.0
    for m in range(1, n + 1):
        out[m] = -np.dot(a[1 : m + 1], out[m - 1 :: -1][:m])
    return out


def _pow_coeffs(a, p, n):
    """A(z)^p truncated at z^n via the Euler recurrence; requires a_0 = 1."""
    out = np.zeros(n + 1)
    out[0] = 1.0
    for m in range(1, n + 1):
        k = np.arange(1, m + 1)
        out[m] = np.dot(((p + 1) * k / m - 1) * out[m - k], a[1 : m + 1])
    return out


def _compose_coeffs(outer, inner, n):
    """outer(inner(z)) truncated at z^n (inner has zero constant term)."""
    res = np.zeros(n + 1)
    res[0] = outer[n]
    for j in range(n - 1, -1, -1):
        res = _mul_trunc(res, inner, n)
        res[0] += outer[j]
    return res


# ---------------------------------------------------------------------------
# elementary hat series

def _hat_coeffs(m: SlitMap, direction: HatDirection, n: int) -> np.ndarray:
    delta, Delta = m.drive_increment, m.capacity_half
    if m.kind == SlitKind.VERTICAL:
        if direction == HatDirection.F_OF_FORWARD:
            sq = np.zeros(n + 1)
            sq[0 : n + 1 : 2] = _binom_coeffs(0.5, -4.0 * Delta, n // 2)
            sq[1] += delta
            inner = _recip_coeffs(sq, n)
        else:
            poly = np.zeros(n + 1)
            poly[0] = 1.0
            poly[1] = -2.0 * delta
            poly[2] = delta * delta + 4.0 * Delta
            inner = _pow_coeffs(poly, -0.5, n)
        out = np.zeros(n + 1)
        out[1:] = inner[:n]
        return out
    # tilted
    fa = _mul_trunc(_binom_coeffs(m.angle - 1.0, m.x_right, n),
                    _binom_coeffs(-m.angle, -m.x_left, n), n)
    out = np.zeros(n + 1)
    out[1:] = fa[:n]
    if direction == HatDirection.H_OF_INVERSE:
        out = _revert_coeffs(out, n)
    return out


def _map_radius(m: SlitMap, direction: HatDirection) -> float:
    if direction == HatDirection.H_OF_INVERSE:
        return abs(tip(m))  # farthest slit point from the origin
    if m.kind == SlitKind.TILTED:
        return max(m.x_left, m.x_right)  # slit attached at 0: no off-cut zero
    # vertical growing map vanishes at -sign(delta)*sqrt(delta^2+4*Delta),
    # which lies beyond the branch points when delta != 0
    return math.sqrt(m.drive_increment ** 2 + 4.0 * m.capacity_half)


def hat_of_map(m: SlitMap, direction: HatDirection | str, n: int = DEFAULT_ORDER) -> HatSeries:
    """Truncated hat series of one elementary map, in either direction."""
    if n < 2:
        raise ValueError(f"order must be >= 2, got {n}")
    direction = HatDirection(direction)
    return HatSeries(_hat_coeffs(m, direction, n), _map_radius(m, direction))


def compose(outer: HatSeries, inner: HatSeries, n: int | None = None) -> HatSeries:
    """Truncated composition outer(inner(z)); the hat of the composed maps.

    The returned radius is the conservative max of the operands'; block
    builders overwrite it with the radius computed for the whole block.
    """
    if outer.order != inner.order:
        raise ValueError("hat series orders differ")
    n = outer.order if n is None else n
    return HatSeries(_compose_coeffs(outer.coeffs, inner.coeffs, n),
                     max(outer.radius_inv_domain, inner.radius_inv_domain))


def _revert_coeffs(a, n):
    b = np.zeros(n + 1)
    b[1] = 1.0
    for m in range(2, n + 1):
        b[m] = -_compose_coeffs(a, b, m)[m]
    return b


def revert(series: HatSeries, n: int | None = None) -> HatSeries:
    """Compositional inverse: compose(revert(S), S) = identity through order n."""
    n = series.order if n is None else n
    return HatSeries(_revert_coeffs(series.coeffs, n), series.radius_inv_domain)


def eval_via_hat(series: HatSeries, z):
    """Evaluate the represented map at z through the truncated hat series.

    Computes z / (1 + a_2/z + ... + a_n/z^(n-1)).  Raises GateError when
    the truncated sum collapses, which means the caller's gate let an
    argument through that the series cannot represent.
    """
    a = series.coeffs
    n = len(a) - 1
    z = np.asarray(z, dtype=complex)
    u = 1.0 / z
    t = np.full_like(z, a[n])
    for j in range(n - 1, 0, -1):
        t = t * u + a[j]
    if np.any(np.abs(t * u) < 1e-300):
        raise GateError("truncated hat series vanished; argument below the gate")
    return z / t


# ---------------------------------------------------------------------------
# convergence radii

def _interval_and_foot(m: SlitMap):
    """Real footprint (-a, b) of the growing map f and its attachment value."""
    if m.kind == SlitKind.VERTICAL:
        r = 2.0 * math.sqrt(m.capacity_half)
        return r, r, m.drive_increment
    return m.x_right, m.x_left, 0.0


def _h_real(m: SlitMap, y: float) -> float:
    return float(np.real(apply_h(m, complex(y, 0.0))))


def radius_forward(maps) -> float:
    """Exact series radius for a block F = maps[0] o maps[1] o ... .

    Tracks the outermost real branch points of the composition and the
    real preimage of 0 (where F vanishes) by pulling them back through
    each member's unzipping map; the radius is the largest modulus among
    them.  Beyond the returned R both F(R) and F(-R) are real.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("empty block")
    A, B, foot = _interval_and_foot(maps[0])
    x0 = None if foot == 0.0 else _h_real(maps[0], 0.0)
    for m in maps[1:]:
        a_k, b_k, foot_k = _interval_and_foot(m)
        new_B, new_A = b_k, a_k
        if B > foot_k:
            new_B = max(new_B, _h_real(m, B))
        if -A < foot_k:
            new_A = max(new_A, abs(_h_real(m, -A)))
        if x0 is not None:
            # a zero landing exactly on the foot merges with the branch points
            x0 = None if x0 == foot_k else _h_real(m, x0)
        A, B = new_A, new_B
        if x0 is not None and abs(x0) <= max(A, B):
            x0 = None  # absorbed: dominated by the branch points
    R = max(A, B)
    if x0 is not None:
        R = max(R, abs(x0))
    return R


def radius_inverse(images) -> float:
    """Block radius for the unzipping direction: max |w| over the images
    of the block's member points under the already-built prefix."""
    images = np.asarray(images, dtype=complex)
    if images.size == 0:
        raise ValueError("empty image list")
    return float(np.max(np.abs(images)))


# ---------------------------------------------------------------------------
# block plans for the forward solver

@dataclass(frozen=True)
class Block:
    """One composed block: maps[start:stop], its hat series and gate radius."""

    series: HatSeries
    start: int
    stop: int
    radius: float


@dataclass(frozen=True)
class BlockPlan:
    """Grouping of the forward maps into b-sized blocks with hat series.

    ``blocks`` covers the prefix of ``maps`` that fills complete blocks;
    the remainder is evaluated map by map.
    """

    block_size: int
    order: int
    gate: float
    maps: tuple
    blocks: tuple

    def __post_init__(self):
        if self.block_size < 1 or self.order < 2 or not self.gate > 1.0:
            raise ValueError("need block_size >= 1, order >= 2, gate > 1")


def build_forward_plan(maps, block_size: int, n: int = DEFAULT_ORDER,
                       gate: float = DEFAULT_GATE) -> BlockPlan:
    """Compose hat series and radii for every full block of forward maps.

    Uniform-kind map sequences go through the batched coefficient kernels;
    mixed sequences fall back to the per-map reference operations.
    """
    from . import _seriesbatch as sb

    maps = tuple(maps)
    b = int(block_size)
    nfull = (len(maps) // b) * b
    kinds = {m.kind for m in maps[:nfull]}
    blocks = []
    if nfull and kinds == {SlitKind.VERTICAL}:
        ds = np.array([m.drive_increment for m in maps[:nfull]])
        Ds = np.array([m.capacity_half for m in maps[:nfull]])
        hats = sb.batch_hat_vertical_f(ds, Ds, n).reshape(nfull // b, b, n + 1)
        coeffs = sb.compose_chain(hats)
        radii = sb.vertical_radii_forward(ds, Ds, b)
        for j, (row, R) in enumerate(zip(coeffs, radii)):
            blocks.append(Block(HatSeries(row, R), j * b, (j + 1) * b, R))
    elif nfull and kinds == {SlitKind.TILTED}:
        al = np.array([m.angle for m in maps[:nfull]])
        xl = np.array([m.x_left for m in maps[:nfull]])
        xr = np.array([m.x_right for m in maps[:nfull]])
        hats = sb.batch_hat_tilted_f(al, xl, xr, n).reshape(nfull // b, b, n + 1)
        coeffs = sb.compose_chain(hats)
        for j, row in enumerate(coeffs):
            R = radius_forward(maps[j * b: (j + 1) * b])
            blocks.append(Block(HatSeries(row, R), j * b, (j + 1) * b, R))
    else:
        for start in range(0, nfull, b):
            chunk = maps[start: start + b]
            series = hat_of_map(chunk[0], HatDirection.F_OF_FORWARD, n)
            for m in chunk[1:]:
                series = compose(series, hat_of_map(m, HatDirection.F_OF_FORWARD, n))
            R = radius_forward(chunk)
            blocks.append(Block(series.with_radius(R), start, start + b, R))
    return BlockPlan(b, n, float(gate), maps, tuple(blocks))
