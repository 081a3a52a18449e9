"""Compiled inner loops.

All reductions run in a fixed ascending index order with Kahan compensation
so results do not depend on how callers split work across threads.
"""

import math

import numpy as np
from numba import njit

_BIG = 1e150
_LOG_BIG = math.log(_BIG)


@njit(cache=True, nogil=True)
def sector_rows(p1, p2, parity, k_start, log_anchor, anchor_sign, out):
    """Fill ``out[i]`` with row ``n = parity + 2 * (k_start + i)`` restricted to
    columns ``mu = parity + 2 * j``.

    Each row is the normalizable solution of the three-term recurrence

        a[j-1] x[j-1] + d[j] x[j] + a[j] x[j+1] = 0,
        d[j] = p1^2 (mu + 1) + p2^2 mu - n,  a[j] = p1 p2 sqrt((mu + 1)(mu + 2)),

    i.e. the eigen-equation of the rotated number operator. The recurrence is
    run upward from ``mu = parity`` to ``mu = n`` (stable below the lower
    turning point) and downward from the last column (Miller), the two pieces
    are matched at ``mu = n`` and the result is scaled to the known first
    column ``exp(log_anchor) * anchor_sign``.
    """
    n_rows, n_cols = out.shape
    p11 = p1 * p1
    p22 = p2 * p2
    p12 = p1 * p2
    a = np.empty(n_cols)
    for j in range(n_cols):
        mu = parity + 2.0 * j
        a[j] = p12 * math.sqrt((mu + 1.0) * (mu + 2.0))
    f = np.empty(n_cols)
    b = np.empty(n_cols)
    for i in range(n_rows):
        k = k_start + i
        n = parity + 2.0 * k
        if n_cols == 1:
            out[i, 0] = anchor_sign[i] * math.exp(log_anchor[i])
            continue
        jm = min(k, n_cols - 2)
        # upward piece
        f[0] = 1.0
        logf = 0.0
        f[1] = -(p11 * (parity + 1.0) + p22 * parity - n) / a[0]
        for j in range(1, jm + 1):
            mu = parity + 2.0 * j
            d = p11 * (mu + 1.0) + p22 * mu - n
            f[j + 1] = -(a[j - 1] * f[j - 1] + d * f[j]) / a[j]
            if abs(f[j + 1]) > _BIG:
                for q in range(j + 2):
                    f[q] /= _BIG
                logf += _LOG_BIG
        # downward piece
        b[n_cols - 1] = 1.0
        upper = 0.0
        for j in range(n_cols - 1, jm, -1):
            mu = parity + 2.0 * j
            d = p11 * (mu + 1.0) + p22 * mu - n
            b[j - 1] = -(d * b[j] + a[j] * upper) / a[j - 1]
            upper = b[j]
            if abs(b[j - 1]) > _BIG:
                for q in range(j - 1, n_cols):
                    b[q] /= _BIG
                upper /= _BIG
        num = f[jm] * b[jm] + f[jm + 1] * b[jm + 1]
        den = b[jm] * b[jm] + b[jm + 1] * b[jm + 1]
        s = num / den
        scale = anchor_sign[i] * math.exp(logf + log_anchor[i])
        for j in range(jm + 1):
            out[i, j] = f[j] * scale
        for j in range(jm + 1, n_cols):
            out[i, j] = s * b[j] * scale


@njit(cache=True, nogil=True)
def survival_even(rows, c0, thetas, out):
    """``out[t, k] = sum_j rows[k, j] c0[j] exp(-i mu_j theta_t)`` with ``mu_j = 2 j``.

    Only the first ``len(c0)`` columns of ``rows`` are used.
    """
    n_t = thetas.shape[0]
    n_rows = rows.shape[0]
    n_cols = c0.shape[0]
    cr = np.empty(n_cols)
    ci = np.empty(n_cols)
    for t in range(n_t):
        th = thetas[t]
        for j in range(n_cols):
            ph = 2.0 * j * th
            cr[j] = c0[j] * math.cos(ph)
            ci[j] = -c0[j] * math.sin(ph)
        for k in range(n_rows):
            sr = 0.0
            er = 0.0
            si = 0.0
            ei = 0.0
            for j in range(n_cols):
                x = rows[k, j]
                yr = x * cr[j] - er
                tr = sr + yr
                er = (tr - sr) - yr
                sr = tr
                yi = x * ci[j] - ei
                ti = si + yi
                ei = (ti - si) - yi
                si = ti
            out[t, k] = complex(sr, si)


@njit(cache=True, nogil=True)
def autocorrelation(w, lag_max, out):
    """``out[l] = sum_k w[k + l] w[k]`` for ``0 <= l <= lag_max``."""
    n = w.shape[0]
    for lag in range(lag_max + 1):
        s = 0.0
        e = 0.0
        for k in range(n - lag):
            y = w[k + lag] * w[k] - e
            t = s + y
            e = (t - s) - y
            s = t
        out[lag] = s


@njit(cache=True, nogil=True)
def kahan_sum(x):
    s = 0.0
    e = 0.0
    for i in range(x.shape[0]):
        y = x[i] - e
        t = s + y
        e = (t - s) - y
        s = t
    return s
