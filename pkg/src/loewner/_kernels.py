"""Fused hot loops for the vertical-slit solvers.

The O(N^2) triangular sweeps and the gated block stages spend their time
in elementary updates like ``z -> delta + z*sqrt(1 - 4*Delta/z^2)``; with
numba available these are compiled to single passes, which both the naive
and the blocked paths use so timing comparisons stay fair.  The truncated
series evaluation of a gated block is laid out as separate real/imaginary
arrays so the coefficient loop vectorizes.  Without numba the callers fall
back to the vectorized numpy implementations (identical math, larger
constants).

Tilted-slit paths are not compiled: they need the Newton inversion and
are only exercised at validation scale.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


@njit(cache=True)
def vert_solve_naive(ds, Ds):
    """All trace points of a vertical-slit composition, triangular sweep."""
    N = ds.shape[0]
    out = np.zeros(N + 1, dtype=np.complex128)
    for i in range(N, 0, -1):
        d = ds[i - 1]
        D = Ds[i - 1]
        for j in range(i + 1, N + 1):
            z = out[j]
            out[j] = d + z * np.sqrt(1.0 - 4.0 * D / (z * z))
        out[i] = d + 2j * np.sqrt(D)
    return out


@njit(cache=True)
def _gated_series_pass(row, thresh, ds, Ds, lo, hi, w):
    """Apply one block to the working vector w, in place.

    Arguments past the gate go through the truncated hat series; the rest
    get the nested member maps lo..hi-1 (0-based), innermost first.  Both
    groups are gathered so the inner loops run over independent elements.
    """
    n = row.shape[0] - 1
    m = w.shape[0]
    idx = np.empty(m, dtype=np.int64)
    uidx = np.empty(m, dtype=np.int64)
    g = 0
    u = 0
    for t in range(m):
        z = w[t]
        if z.real * z.real + z.imag * z.imag >= thresh * thresh:
            idx[g] = t
            g += 1
        else:
            uidx[u] = t
            u += 1
    if u > 0:
        buf = np.empty(u, dtype=np.complex128)
        for e in range(u):
            buf[e] = w[uidx[e]]
        for i in range(hi - 1, lo - 1, -1):
            d = ds[i]
            D4 = 4.0 * Ds[i]
            for e in range(u):
                z = buf[e]
                buf[e] = d + z * np.sqrt(1.0 - D4 / (z * z))
        for e in range(u):
            w[uidx[e]] = buf[e]
    if g == 0:
        return
    ure = np.empty(g)
    uim = np.empty(g)
    for e in range(g):
        z = w[idx[e]]
        q2 = z.real * z.real + z.imag * z.imag
        ure[e] = z.real / q2
        uim[e] = -z.imag / q2
    tre = np.full(g, row[n])
    tim = np.zeros(g)
    for q in range(n - 1, 0, -1):
        aq = row[q]
        for e in range(g):
            a = tre[e] * ure[e] - tim[e] * uim[e] + aq
            tim[e] = tre[e] * uim[e] + tim[e] * ure[e]
            tre[e] = a
    # f(z) ~ 1/(u * t)
    for e in range(g):
        pre = ure[e] * tre[e] - uim[e] * tim[e]
        pim = ure[e] * tim[e] + uim[e] * tre[e]
        q2 = pre * pre + pim * pim
        w[idx[e]] = complex(pre / q2, -pim / q2)


@njit(cache=True)
def vert_solve_blocked(ds, Ds, coeffs, radii, b, gate):
    """Blocked forward solve: tail sweeps then gated block stages."""
    N = ds.shape[0]
    out = np.zeros(N + 1, dtype=np.complex128)
    for lo in range(0, N, b):
        hi = min(lo + b, N)
        for i in range(hi, lo, -1):
            d = ds[i - 1]
            D = Ds[i - 1]
            for j in range(i + 1, hi + 1):
                z = out[j]
                out[j] = d + z * np.sqrt(1.0 - 4.0 * D / (z * z))
            out[i] = d + 2j * np.sqrt(D)
    for j in range((N - 1) // b, 0, -1):
        _gated_series_pass(coeffs[j - 1], gate * radii[j - 1],
                           ds, Ds, (j - 1) * b, j * b, out[j * b + 1:])
    return out


@njit(cache=True)
def vert_extract_naive(pts, lift_im):
    """Unzip curve points with vertical slits; returns (Delta_k, delta_k, lifts).

    ``pts`` excludes the leading origin.  Images that land at or below the
    axis are lifted to ``lift_im`` and their 1-based indices returned.
    """
    N = pts.shape[0]
    w = pts.copy()
    Ds = np.empty(N)
    ds = np.empty(N)
    lifted = np.empty(N, dtype=np.int64)
    lifts = 0
    for k in range(N):
        wk = w[k]
        if wk.imag <= 0.0:
            wk = complex(wk.real, lift_im)
            lifted[lifts] = k + 1
            lifts += 1
        d = wk.real
        D = 0.25 * wk.imag * wk.imag
        Ds[k] = D
        ds[k] = d
        for j in range(k + 1, N):
            u = w[j] - d
            w[j] = u * np.sqrt(1.0 + 4.0 * D / (u * u))
    return Ds, ds, lifted[:lifts]


@njit(cache=True)
def _vert_hhat_row(d, D, n, row):
    # hhat = z * ((1 - d z)^2 + 4 D z^2)^(-1/2) via the power recurrence
    a1 = -2.0 * d
    a2 = d * d + 4.0 * D
    tmp = np.zeros(n + 1)
    tmp[0] = 1.0
    for m in range(1, n + 1):
        acc = (0.5 / m - 1.0) * tmp[m - 1] * a1
        if m >= 2:
            acc += (1.0 / m - 1.0) * tmp[m - 2] * a2
        tmp[m] = acc
    row[0] = 0.0
    for m in range(1, n + 1):
        row[m] = tmp[m - 1]


@njit(cache=True)
def _compose_rows(outer, inner, n, scratch, res):
    # res = outer(inner(z)) truncated; Horner over outer's coefficients
    for q in range(n + 1):
        res[q] = 0.0
    res[0] = outer[n]
    for j in range(n - 1, -1, -1):
        for q in range(n + 1):
            scratch[q] = 0.0
        for a in range(n + 1):
            ra = res[a]
            if ra != 0.0:
                for c in range(n + 1 - a):
                    scratch[a + c] += ra * inner[c]
        for q in range(n + 1):
            res[q] = scratch[q]
        res[0] += outer[j]


@njit(cache=True)
def _gated_series_pass_h(series, thresh, ds, Ds, lo, hi, w):
    """Inverse-direction block application: like _gated_series_pass but the
    nested fallback applies the unzipping maps lo..hi-1, in fitting order."""
    n = series.shape[0] - 1
    m = w.shape[0]
    idx = np.empty(m, dtype=np.int64)
    uidx = np.empty(m, dtype=np.int64)
    g = 0
    u = 0
    for t in range(m):
        z = w[t]
        if z.real * z.real + z.imag * z.imag >= thresh * thresh:
            idx[g] = t
            g += 1
        else:
            uidx[u] = t
            u += 1
    if u > 0:
        buf = np.empty(u, dtype=np.complex128)
        for e in range(u):
            buf[e] = w[uidx[e]]
        for k in range(lo, hi):
            d = ds[k]
            D4 = 4.0 * Ds[k]
            for e in range(u):
                uu = buf[e] - d
                buf[e] = uu * np.sqrt(1.0 + D4 / (uu * uu))
        for e in range(u):
            w[uidx[e]] = buf[e]
    if g == 0:
        return
    ure = np.empty(g)
    uim = np.empty(g)
    for e in range(g):
        z = w[idx[e]]
        q2 = z.real * z.real + z.imag * z.imag
        ure[e] = z.real / q2
        uim[e] = -z.imag / q2
    tre = np.full(g, series[n])
    tim = np.zeros(g)
    for q in range(n - 1, 0, -1):
        aq = series[q]
        for e in range(g):
            a = tre[e] * ure[e] - tim[e] * uim[e] + aq
            tim[e] = tre[e] * uim[e] + tim[e] * ure[e]
            tre[e] = a
    for e in range(g):
        pre = ure[e] * tre[e] - uim[e] * tim[e]
        pim = ure[e] * tim[e] + uim[e] * tre[e]
        q2 = pre * pre + pim * pim
        w[idx[e]] = complex(pre / q2, -pim / q2)


@njit(cache=True)
def vert_extract_blocked(pts, b, n, gate, lift_im):
    """Blocked unzipping with vertical slits; returns (Delta_k, delta_k, lifts)."""
    N = pts.shape[0]
    w = pts.copy()
    Ds = np.empty(N)
    ds = np.empty(N)
    lifted = np.empty(N, dtype=np.int64)
    lifts = 0
    series = np.zeros(n + 1)
    member = np.zeros(n + 1)
    scratch = np.zeros(n + 1)
    res = np.zeros(n + 1)
    for lo in range(0, N, b):
        hi = min(lo + b, N)
        radius = 0.0
        for k in range(lo, hi):
            a = abs(w[k])
            if a > radius:
                radius = a
        for k in range(lo, hi):
            wk = w[k]
            if wk.imag <= 0.0:
                wk = complex(wk.real, lift_im)
                lifted[lifts] = k + 1
                lifts += 1
            d = wk.real
            D = 0.25 * wk.imag * wk.imag
            Ds[k] = D
            ds[k] = d
            for j in range(k + 1, hi):
                u = w[j] - d
                w[j] = u * np.sqrt(1.0 + 4.0 * D / (u * u))
        if hi >= N:
            break
        # series of H_j = hhat_{hi} o ... o hhat_{lo+1}
        _vert_hhat_row(ds[hi - 1], Ds[hi - 1], n, series)
        for k in range(hi - 2, lo - 1, -1):
            _vert_hhat_row(ds[k], Ds[k], n, member)
            _compose_rows(series, member, n, scratch, res)
            for q in range(n + 1):
                series[q] = res[q]
        _gated_series_pass_h(series, gate * radius, ds, Ds, lo, hi, w[hi:])
    return Ds, ds, lifted[:lifts]
