"""Batched coefficient kernels for building many hat series at once.

Everything here mirrors the scalar reference operations in ``hatseries``
(binomial/reciprocal/power recurrences, truncated composition) but works
on (M, n+1) coefficient matrices so whole blocks are assembled with a
handful of vectorized calls instead of per-map Python loops.  Composition
of a chain uses a balanced tree; truncated polynomial composition is
associative, so the result matches the sequential fold up to rounding.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "batch_mul_trunc",
    "batch_compose",
    "compose_chain",
    "batch_hat_vertical_f",
    "batch_hat_vertical_h",
    "batch_hat_tilted_f",
    "batch_hat_tilted_h",
    "vertical_radii_forward",
]


def _toeplitz_gather(inner: np.ndarray):
    """T[m, i, k] = inner[m, k - i] (0 for k < i): x @ T = mul_trunc(x, inner)."""
    M, w = inner.shape
    k = np.arange(w)
    diff = k[None, :] - k[:, None]
    valid = diff >= 0
    T = inner[:, np.clip(diff, 0, w - 1)]
    T[:, ~valid] = 0.0
    return T


def batch_mul_trunc(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Rowwise truncated polynomial product of (M, n+1) coefficient matrices."""
    return np.einsum("mi,mik->mk", A, _toeplitz_gather(B))


def batch_compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Rowwise truncated composition outer(inner(z)) by Horner's scheme."""
    M, w = outer.shape
    T = _toeplitz_gather(inner)
    res = np.zeros_like(outer)
    res[:, 0] = outer[:, -1]
    for j in range(w - 2, -1, -1):
        res = np.einsum("mi,mik->mk", res, T)
        res[:, 0] += outer[:, j]
    return res


def compose_chain(mats: np.ndarray) -> np.ndarray:
    """Compose mats[:, 0] o mats[:, 1] o ... o mats[:, b-1] rowwise.

    ``mats`` has shape (M, b, n+1); pairs are folded in a balanced tree.
    """
    M, b, w = mats.shape
    cur = mats
    while cur.shape[1] > 1:
        c = cur.shape[1]
        pairs = c // 2
        left = cur[:, 0:2 * pairs:2].reshape(M * pairs, w)
        right = cur[:, 1:2 * pairs:2].reshape(M * pairs, w)
        merged = batch_compose(left, right).reshape(M, pairs, w)
        if c % 2:
            merged = np.concatenate([merged, cur[:, -1:]], axis=1)
        cur = merged
    return cur[:, 0]


# ---------------------------------------------------------------------------
# batched elementary hat coefficients

def _batch_binom(p, c, n):
    """(1 + c_m z)^p_m rows; p and c are length-M arrays."""
    M = len(c)
    out = np.zeros((M, n + 1))
    out[:, 0] = 1.0
    for m in range(1, n + 1):
        out[:, m] = out[:, m - 1] * c * (p - m + 1) / m
    return out


def _batch_recip(A, n):
    out = np.zeros_like(A)
    out[:, 0] = 1.0
    for m in range(1, n + 1):
        out[:, m] = -np.einsum("mk,mk->m", A[:, 1: m + 1], out[:, m - 1:: -1][:, :m])
    return out


def _batch_pow(A, p, n):
    out = np.zeros_like(A)
    out[:, 0] = 1.0
    for m in range(1, n + 1):
        k = np.arange(1, m + 1)
        out[:, m] = np.einsum("mk,mk->m", ((p + 1) * k / m - 1) * out[:, m - k],
                              A[:, 1: m + 1])
    return out


def _shift(inner_coeffs):
    """Multiply each row by z: hat coefficients from the 1/f(1/z)/z part."""
    out = np.zeros_like(inner_coeffs)
    out[:, 1:] = inner_coeffs[:, :-1]
    return out


def batch_hat_vertical_f(deltas, Deltas, n):
    """fhat rows for vertical growing maps: z/(delta z + sqrt(1-4 Delta z^2))."""
    M = len(deltas)
    sq = np.zeros((M, n + 1))
    half = _batch_binom(np.full(M, 0.5), -4.0 * np.asarray(Deltas), n // 2)
    sq[:, 0: 2 * (n // 2) + 1: 2] = half
    sq[:, 1] += deltas
    return _shift(_batch_recip(sq, n))


def batch_hat_vertical_h(deltas, Deltas, n):
    """hhat rows for vertical unzipping maps: z ((1-delta z)^2+4 Delta z^2)^(-1/2)."""
    M = len(deltas)
    poly = np.zeros((M, n + 1))
    poly[:, 0] = 1.0
    poly[:, 1] = -2.0 * np.asarray(deltas)
    poly[:, 2] = np.asarray(deltas) ** 2 + 4.0 * np.asarray(Deltas)
    return _shift(_batch_pow(poly, -0.5, n))


def batch_hat_tilted_f(alphas, x_lefts, x_rights, n):
    """fhat rows for tilted growing maps: z (1+x_r z)^(a-1) (1-x_l z)^(-a)."""
    a = np.asarray(alphas)
    A = _batch_binom(a - 1.0, np.asarray(x_rights), n)
    B = _batch_binom(-a, -np.asarray(x_lefts), n)
    return _shift(batch_mul_trunc(A, B))


def batch_hat_tilted_h(alphas, x_lefts, x_rights, n):
    """hhat rows for tilted unzipping maps: reversion of the growing rows."""
    F = batch_hat_tilted_f(alphas, x_lefts, x_rights, n)
    B = np.zeros_like(F)
    B[:, 1] = 1.0
    for m in range(2, n + 1):
        # coefficient m of F(B) with B_m = 0; correct it to zero
        comp = batch_compose(F[:, : m + 1], B[:, : m + 1])
        B[:, m] = -comp[:, m]
    return B


def vertical_radii_forward(deltas, Deltas, block_size):
    """Series radii of consecutive blocks of vertical growing maps.

    Scalar scan of the incremental branch-endpoint/zero pullback; the
    unzipping map of a vertical slit is sign(u)*sqrt(u^2 + 4*Delta) with
    u = y - delta, so each pullback costs one square root.
    """
    out = []
    nfull = (len(deltas) // block_size) * block_size
    for lo in range(0, nfull, block_size):
        d0, D0 = deltas[lo], Deltas[lo]
        r = 2.0 * math.sqrt(D0)
        A, B = r, r
        x0 = None if d0 == 0.0 else -math.copysign(math.sqrt(d0 * d0 + 4.0 * D0), d0)
        for i in range(lo + 1, lo + block_size):
            d, D = deltas[i], Deltas[i]
            r = 2.0 * math.sqrt(D)
            newB, newA = r, r
            if B > d:
                u = B - d
                newB = max(newB, math.sqrt(u * u + 4.0 * D))
            if -A < d:
                u = -A - d
                newA = max(newA, math.sqrt(u * u + 4.0 * D))
            if x0 is not None:
                if x0 == d:
                    x0 = None
                else:
                    u = x0 - d
                    x0 = math.copysign(math.sqrt(u * u + 4.0 * D), u)
            A, B = newA, newB
            if x0 is not None and abs(x0) <= max(A, B):
                x0 = None
        R = max(A, B)
        if x0 is not None:
            R = max(R, abs(x0))
        out.append(R)
    return out
