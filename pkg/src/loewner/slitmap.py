"""Exact one-step solutions of the chordal Loewner equation.

Two elementary conformal maps are implemented, each growing a straight
slit of prescribed half-plane capacity in the upper half-plane H:

* **vertical**: the slit is the segment from ``delta`` to
  ``delta + 2i*sqrt(Delta)``.  The unzipping map is
  ``h(z) = sqrt((z - delta)^2 + 4*Delta)`` and its inverse is
  ``f(z) = delta + sqrt(z^2 - 4*Delta)``.  The driving function over the
  step is the constant ``delta``.
* **tilted**: the slit is a straight segment from 0 at angle
  ``alpha*pi``.  The growing map is ``f(z) = phi(z + delta)`` with
  ``phi(w) = (w + x_l)^(1-alpha) * (w - x_r)^alpha`` and
  ``x_l = 2*sqrt(Delta*alpha/(1-alpha))``,
  ``x_r = 2*sqrt(Delta*(1-alpha)/alpha)``.  The driving function over the
  step is ``c_alpha * sqrt(t)``.

Normalization: ``h`` maps H minus the slit onto H, sends the slit tip to
the origin and satisfies ``h(z) = z - delta + 2*Delta/z + O(1/z^2)`` at
infinity; ``f = h^{-1}`` sends the origin to the tip and satisfies
``f(z) = z + delta + O(1/z)``.

Branch handling: square roots are evaluated through factorizations like
``(z - delta) * sqrt(1 + 4*Delta/(z - delta)^2)`` whose principal-branch
argument only crosses the negative real axis on the slit itself, so the
formulas are continuous on the upper half-plane minus the slit and behave
like ``z`` at infinity.  Real inputs for which the formula is ambiguous
(points on the slit's footprint) are evaluated by continuity from above,
lifting by ``1e-12 * scale``.

All functions accept scalar or ndarray ``z`` and are pure; SlitMap values
are immutable and safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SlitKind",
    "SlitMap",
    "ConvergenceError",
    "c_alpha",
    "kappa_from_alpha",
    "alpha_from_kappa",
    "make_vertical",
    "make_tilted",
    "tip",
    "apply_f",
    "apply_h",
    "fit_slit",
    "loewner_residual",
]

# lift (relative to map scale) for boundary points where the formula is ambiguous
ETA_BOUNDARY = 1e-12
# clamp for nearly-real fit targets; c_alpha blows up as alpha -> {0, 1}
ALPHA_MIN = 1e-4

_NEWTON_TOL = 1e-12
_NEWTON_MAXIT = 50


class SlitKind(str, enum.Enum):
    VERTICAL = "vertical"
    TILTED = "tilted"


class ConvergenceError(RuntimeError):
    """Newton inversion of a tilted map failed; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class SlitMap:
    """One elementary Loewner step.

    ``capacity_half`` is Delta (the slit has half-plane capacity 2*Delta),
    ``drive_increment`` is delta (change of the driving function over the
    step).  Tilted maps also carry the angle fraction ``alpha`` in (0,1)
    and the footprint endpoints ``x_left``, ``x_right`` of the generating
    map phi.
    """

    kind: SlitKind
    capacity_half: float
    drive_increment: float
    angle: float | None = None
    x_left: float | None = None
    x_right: float | None = None

    def __post_init__(self):
        if not self.capacity_half > 0:
            raise ValueError(f"capacity_half must be > 0, got {self.capacity_half}")
        if self.kind == SlitKind.TILTED:
            if self.angle is None or not 0 < self.angle < 1:
                raise ValueError(f"tilted map needs angle in (0,1), got {self.angle}")

    @property
    def scale(self) -> float:
        """Natural length scale of the map, |tip|."""
        return abs(tip(self))


def c_alpha(alpha: float) -> float:
    """Driving-strength coefficient of a straight slit at angle alpha*pi.

    The straight slit grown with constant angle has driving function
    c_alpha * sqrt(t) with c_alpha = 2*(1 - 2*alpha)/sqrt(alpha*(1-alpha)).
    Positive iff alpha < 1/2; c_{1-alpha} = -c_alpha.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    return 2.0 * (1.0 - 2.0 * alpha) / math.sqrt(alpha * (1.0 - alpha))


def kappa_from_alpha(alpha: float) -> float:
    """SLE parameter reached in the small-slit limit of angle-alpha*pi steps.

    kappa = 4*(2*alpha - 1)^2 / (alpha*(1-alpha)) = c_alpha^2.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    return 4.0 * (2.0 * alpha - 1.0) ** 2 / (alpha * (1.0 - alpha))


def alpha_from_kappa(kappa: float, sign: int = -1) -> float:
    """Invert kappa_from_alpha on one branch.

    ``sign`` selects the branch: -1 gives alpha < 1/2 (positive drive
    coefficient), +1 gives alpha > 1/2.  With u = sqrt(kappa/(kappa+16)),
    alpha = (1 + sign*u)/2.
    """
    kappa = float(kappa)
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if sign not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {sign}")
    u = math.sqrt(kappa / (kappa + 16.0))
    return 0.5 * (1.0 + sign * u)


def make_vertical(delta: float, Delta: float) -> SlitMap:
    """Vertical slit step: segment from delta to delta + 2i*sqrt(Delta)."""
    return SlitMap(SlitKind.VERTICAL, float(Delta), float(delta))


def make_tilted(delta: float, Delta: float) -> SlitMap:
    """Tilted slit step with drive increment delta over capacity time Delta.

    The angle is recovered from c = delta/sqrt(Delta) through the closed
    form u = c/sqrt(c^2 + 16), alpha = (1 - u)/2, which inverts
    delta = c_alpha*sqrt(Delta).
    """
    Delta = float(Delta)
    delta = float(delta)
    if not Delta > 0:
        raise ValueError(f"Delta must be > 0, got {Delta}")
    c = delta / math.sqrt(Delta)
    u = c / math.sqrt(c * c + 16.0)
    alpha = 0.5 * (1.0 - u)
    return _tilted_from_alpha(alpha, Delta)


def _tilted_from_alpha(alpha: float, Delta: float) -> SlitMap:
    xl = 2.0 * math.sqrt(Delta) * math.sqrt(alpha / (1.0 - alpha))
    xr = 2.0 * math.sqrt(Delta) * math.sqrt((1.0 - alpha) / alpha)
    delta = c_alpha(alpha) * math.sqrt(Delta)
    return SlitMap(SlitKind.TILTED, Delta, delta, angle=alpha, x_left=xl, x_right=xr)


def tip(m: SlitMap) -> complex:
    """Endpoint of the slit; equals f(0).

    Vertical: delta + 2i*sqrt(Delta).  Tilted: phi evaluated at the final
    driving value delta = c_alpha*sqrt(Delta), which is the critical point
    of phi on the footprint; in closed form
    2*sqrt(Delta) * alpha^(alpha-1/2) * (1-alpha)^(1/2-alpha) * e^(i*pi*alpha).
    """
    if m.kind == SlitKind.VERTICAL:
        return complex(m.drive_increment, 2.0 * math.sqrt(m.capacity_half))
    a = m.angle
    mod = 2.0 * math.sqrt(m.capacity_half) * a ** (a - 0.5) * (1.0 - a) ** (0.5 - a)
    return mod * complex(math.cos(math.pi * a), math.sin(math.pi * a))


# ---------------------------------------------------------------------------
# forward map f (grows the slit; 0 -> tip)

def _f_vertical(delta, Delta, z):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    real = z.imag == 0.0
    if np.any(real):
        x = z.real[real]
        r2 = x * x - 4.0 * Delta
        cut = r2 <= 0.0
        val = np.empty(x.shape, dtype=complex)
        # on the footprint [-2 sqrt(D), 2 sqrt(D)]: limit from above
        val[cut] = delta + 1j * np.sqrt(-r2[cut])
        val[~cut] = delta + np.sign(x[~cut]) * np.sqrt(r2[~cut])
        out[real] = val
    if np.any(~real):
        zi = z[~real]
        # principal branch of 1 - 4D/z^2 only meets the negative reals on the
        # footprint, so the product z*sqrt(.) is the correct branch off it
        out[~real] = delta + zi * np.sqrt(1.0 - 4.0 * Delta / (zi * zi))
    return out


def _f_tilted(m: SlitMap, z):
    z = np.asarray(z, dtype=complex)
    zz = z + m.drive_increment  # argument of phi
    xl, xr, a = m.x_left, m.x_right, m.angle
    out = np.empty_like(z)
    real = zz.imag == 0.0
    if np.any(real):
        x = zz.real[real]
        val = np.empty(x.shape, dtype=complex)
        right = x >= xr
        left = x <= -xl
        mid = ~(right | left)
        val[right] = (x[right] + xl) ** (1.0 - a) * (x[right] - xr) ** a
        val[left] = -((-x[left] - xl) ** (1.0 - a) * (xr - x[left]) ** a)
        # footprint: limit from above carries the phase e^{i pi a}
        val[mid] = ((x[mid] + xl) ** (1.0 - a) * (xr - x[mid]) ** a
                    * complex(math.cos(math.pi * a), math.sin(math.pi * a)))
        out[real] = val
    if np.any(~real):
        w = zz[~real]
        out[~real] = np.exp((1.0 - a) * np.log(w + xl) + a * np.log(w - xr))
    return out


def apply_f(m: SlitMap, z):
    """Evaluate the slit-growing map f at z (scalar or array).

    f maps H onto H minus the slit, sends 0 to the tip and satisfies
    f(z) = z + delta + O(1/z) at infinity.  Boundary (real) inputs are
    evaluated by continuity from above.
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    if m.kind == SlitKind.VERTICAL:
        out = _f_vertical(m.drive_increment, m.capacity_half, z)
    else:
        out = _f_tilted(m, z)
    return complex(out[()]) if scalar else out


# ---------------------------------------------------------------------------
# inverse map h (unzips the slit; tip -> 0)

def _h_vertical(delta, Delta, z):
    z = np.asarray(z, dtype=complex)
    u = z - delta
    # points on the slit (u purely imaginary, |u| <= 2 sqrt(D)) and the base
    # u == 0 are ambiguous; nudge them off by the boundary lift
    amb = (u.real == 0.0) & (u.imag <= 2.0 * math.sqrt(Delta))
    if np.any(amb):
        u = u + amb * (ETA_BOUNDARY * (abs(delta) + 2.0 * math.sqrt(Delta)))
    return u * np.sqrt(1.0 + 4.0 * Delta / (u * u))


def _phi_tilted(m: SlitMap, zz):
    return np.exp((1.0 - m.angle) * np.log(zz + m.x_left)
                  + m.angle * np.log(zz - m.x_right))


def _h_tilted(m: SlitMap, z):
    """Newton inversion of phi; vectorized over z."""
    z = np.asarray(z, dtype=complex)
    xl, xr, a, delta = m.x_left, m.x_right, m.angle, m.drive_increment
    w = z.ravel()
    tipv = tip(m)

    # initial guess 1: vertical-slit inverse with the same (delta, Delta)
    u = w - delta
    u = np.where(u == 0.0, ETA_BOUNDARY * abs(tipv) * 1j, u)
    g1 = u * np.sqrt(1.0 + 4.0 * m.capacity_half / (u * u)) + delta
    # initial guess 2: local quadratic model at the tip (phi'(delta) = 0)
    d2 = tipv * (-(1.0 - a) / (delta + xl) ** 2 - a / (delta - xr) ** 2)
    root = np.sqrt(2.0 * (w - tipv) / d2)
    root = np.where(root.imag >= 0.0, root, -root)
    g2 = delta + root
    # guesses 3/4: local inversion at the feet, where phi' blows up and
    # plain Newton would crawl
    s = xl + xr
    g3 = xr + np.exp(np.log(w / s ** (1.0 - a)) / a)
    g4 = -xl + np.exp(np.log(w * np.exp(-1j * math.pi * a) / s ** a) / (1.0 - a))
    zeta = g1
    res = np.abs(_phi_tilted(m, g1) - w)
    for g in (g2, g3, g4):
        g = np.where(g.imag < 0.0, np.conj(g), g)
        r = np.abs(_phi_tilted(m, g) - w)
        better = r < res
        zeta = np.where(better, g, zeta)
        res = np.where(better, r, res)

    tol = _NEWTON_TOL * np.maximum(1.0, np.abs(w))
    zeta, res = _newton_polish(m, w, zeta, tol)
    active = res > tol
    if np.any(active):
        # fallback for targets hugging the slit: plain Newton can get pinned
        # on the wrong face of the slit.  Seed from the footprint half that
        # maps to w's face (|phi| is monotone along each half).
        idx = np.nonzero(active)[0]
        seeds = np.array([_side_seed(m, w[i]) for i in idx])
        cur, rs = _newton_polish(m, w[idx], seeds, tol[idx])
        zeta[idx] = cur
        res[idx] = rs
        active = res > tol
    if np.any(active):
        bad = zeta[active][0] - delta
        raise ConvergenceError(
            f"tilted inverse did not converge for {int(np.sum(active))} point(s); "
            f"worst residual {float(np.max(res)):.3e}",
            last_iterate=complex(bad),
        )
    return (zeta - delta).reshape(z.shape)


def _side_seed(m: SlitMap, w) -> complex:
    """Seed for targets near the slit, on the matching face.

    Along each half of the footprint [-x_l, x_r] split at the tip preimage
    delta, |phi| runs monotonically between 0 and |tip|; bisect to the
    target modulus on the half that maps to w's side of the slit ray.
    """
    a, delta = m.angle, m.drive_increment
    tipv = tip(m)
    modw = min(abs(w), abs(tipv))
    side = np.angle(w) - math.pi * a
    lo, hi = delta, (m.x_right if side <= 0 else -m.x_left)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(_phi_tilted(m, np.complex128(mid))) > modw:
            lo = mid
        else:
            hi = mid
    seed = 0.5 * (lo + hi)
    fz = _phi_tilted(m, np.complex128(seed))
    dphi = fz * ((1.0 - a) / (seed + m.x_left) + a / (seed - m.x_right))
    dist = abs(fz - w) / max(abs(dphi), 1e-300)
    return seed + 1j * max(dist, ETA_BOUNDARY * abs(tipv))


def _newton_polish(m: SlitMap, w, zeta, tol):
    """Damped Newton for phi(zeta) = w; iterates reflected into closed H."""
    xl, xr, a = m.x_left, m.x_right, m.angle
    zeta = np.array(zeta, dtype=complex)
    res = np.abs(_phi_tilted(m, zeta) - w)
    active = res > tol
    for _ in range(_NEWTON_MAXIT):
        if not np.any(active):
            break
        za = zeta[active]
        fz = _phi_tilted(m, za)
        rm = np.abs(fz - w[active])
        step = (fz - w[active]) / (fz * ((1.0 - a) / (za + xl) + a / (za - xr)))
        new = za - step
        new = np.where(new.imag < 0.0, np.conj(new), new)
        rn = np.abs(_phi_tilted(m, new) - w[active])
        for _ in range(8):
            worse = rn > rm
            if not np.any(worse):
                break
            step = np.where(worse, 0.5 * step, step)
            new = za - step
            new = np.where(new.imag < 0.0, np.conj(new), new)
            rn = np.abs(_phi_tilted(m, new) - w[active])
        zeta[active] = new
        res[active] = rn
        active = res > tol
    return zeta, res


def apply_h(m: SlitMap, z):
    """Evaluate the unzipping map h = f^{-1} at z (scalar or array).

    Maps H minus the slit onto H and sends the tip to the origin.  The
    tilted branch is inverted by damped Newton iteration seeded with the
    vertical-slit inverse and a near-tip quadratic model; raises
    ConvergenceError (carrying the last iterate) on failure.
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    if m.kind == SlitKind.VERTICAL:
        out = _h_vertical(m.drive_increment, m.capacity_half, z)
    else:
        out = _h_tilted(m, z)
    return complex(out[()]) if scalar else out


def _f_interior(m: SlitMap, z):
    """apply_f for strictly interior arguments: no boundary handling.

    Used by the solvers, whose working arrays stay in the open half-plane.
    """
    if m.kind == SlitKind.VERTICAL:
        return m.drive_increment + z * np.sqrt(1.0 - 4.0 * m.capacity_half / (z * z))
    zz = z + m.drive_increment
    return np.exp((1.0 - m.angle) * np.log(zz + m.x_left)
                  + m.angle * np.log(zz - m.x_right))


def _h_interior(m: SlitMap, z):
    """apply_h for strictly interior arguments off the slit."""
    if m.kind == SlitKind.VERTICAL:
        u = z - m.drive_increment
        return u * np.sqrt(1.0 + 4.0 * m.capacity_half / (u * u))
    return _h_tilted(m, z)


def fit_slit(w: complex, kind: SlitKind | str = SlitKind.VERTICAL) -> SlitMap:
    """Fit the elementary map whose slit tip is w (Im w > 0).

    Vertical: delta = Re w, Delta = (Im w)^2/4.  Tilted: the angle is
    arg(w)/pi clamped to [ALPHA_MIN, 1-ALPHA_MIN] and Delta follows from
    |tip(alpha, Delta)| = sqrt(Delta)*|tip(alpha, 1)| = |w|.
    """
    kind = SlitKind(kind)
    w = complex(w)
    if not w.imag > 0:
        raise ValueError(f"slit tip must lie in the open half-plane, got {w}")
    if kind == SlitKind.VERTICAL:
        return make_vertical(w.real, 0.25 * w.imag * w.imag)
    alpha = min(max(np.angle(w) / math.pi, ALPHA_MIN), 1.0 - ALPHA_MIN)
    unit_mod = 2.0 * alpha ** (alpha - 0.5) * (1.0 - alpha) ** (0.5 - alpha)
    Delta = (abs(w) / unit_mod) ** 2
    return _tilted_from_alpha(alpha, Delta)


# ---------------------------------------------------------------------------
# Loewner-equation residual (test utility)

def _family_g(m: SlitMap, z, s: float):
    """The exact interior flow g_s and driving U_s of the map's family."""
    if m.kind == SlitKind.VERTICAL:
        delta = m.drive_increment
        u = np.asarray(z, dtype=complex) - delta
        return delta + u * np.sqrt(1.0 + 4.0 * s / (u * u)), delta
    ms = _tilted_from_alpha(m.angle, s)
    return apply_h(ms, z) + ms.drive_increment, ms.drive_increment


def loewner_residual(m: SlitMap, z: complex, t: float, dt: float) -> float:
    """Central-difference defect of dg_t/dt = 2/(g_t - U_t) for the map's family.

    Vertical maps evolve with constant driving; tilted maps with the
    square-root driving of fixed angle.  Requires 0 < dt < t <= Delta.
    """
    if not 0 < dt < t:
        raise ValueError("need 0 < dt < t")
    gp, _ = _family_g(m, z, t + dt)
    gm, _ = _family_g(m, z, t - dt)
    g0, u0 = _family_g(m, z, t)
    return float(abs((gp - gm) / (2.0 * dt) - 2.0 / (g0 - u0)))
