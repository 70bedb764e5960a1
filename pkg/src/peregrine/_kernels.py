"""Compiled O(N^2) kernel sums.

All periodic kernels are written in terms of ``E = exp(2 pi i z / P)``, for
which ``cot(pi (z_i - z_j) / P) = i (E_i + E_j) / (E_i - E_j)``.  The
principal-value sums use the alternating-point rule: target ``i`` only sees
sources ``j`` with ``i - j`` odd, each with weight twice the spacing.
"""
import warnings

import numba
import numpy as np

from ._threads import n_workers

_nthreads = min(n_workers(), numba.config.NUMBA_NUM_THREADS)
with warnings.catch_warnings():
    # an old system TBB only makes numba fall back to another threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    numba.set_num_threads(_nthreads)


@numba.njit(parallel=True, cache=True)
def cot_sum(E, g):
    """out_i = sum_{j, i-j odd} g_j (E_i + E_j) / (E_i - E_j)."""
    n = E.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in numba.prange(n):
        ei = E[i]
        acc = 0j
        for j in range((i + 1) % 2, n, 2):
            ej = E[j]
            acc += g[j] * (ei + ej) / (ei - ej)
        out[i] = acc
    return out


@numba.njit(parallel=True, cache=True)
def real_cot_sum(E, u, v, f):
    """out_i = sum_{j, i-j odd} Re{u_i v_j (E_i + E_j)/(E_i - E_j)} f_j, f real."""
    n = E.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in numba.prange(n):
        ei = E[i]
        ui = u[i]
        acc = 0.0
        for j in range((i + 1) % 2, n, 2):
            ej = E[j]
            k = ui * v[j] * (ei + ej) / (ei - ej)
            acc += k.real * f[j]
        out[i] = acc
    return out


@numba.njit(parallel=True, cache=True)
def quotient_square_sum(E, D, w):
    """out_i = sum_{j, i-j odd} (D_i - D_j)^2 (-4 E_i E_j / (E_i - E_j)^2) w_j.

    ``-4 E_i E_j / (E_i - E_j)^2`` equals ``1 / sin^2(pi (z_i - z_j) / P)``.
    """
    n = E.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in numba.prange(n):
        ei = E[i]
        di = D[i]
        acc = 0j
        for j in range((i + 1) % 2, n, 2):
            ej = E[j]
            q = ei - ej
            dd = di - D[j]
            acc += dd * dd * (-4.0 * ei * ej / (q * q)) * w[j]
        out[i] = acc
    return out


@numba.njit(parallel=True, cache=True)
def chord_arc_bounds(z, a, period):
    """Min and max of |z_i - z_j| / |a_i - a_j| over all node pairs.

    ``period`` > 0 means z - a is periodic with that period; pairs are then
    compared at their nearest periodic offset.
    """
    n = z.shape[0]
    lo = np.full(n, np.inf)
    hi = np.zeros(n)
    for i in numba.prange(n):
        mn = np.inf
        mx = 0.0
        for j in range(n):
            if j == i:
                continue
            da = a[i] - a[j]
            dz = z[i] - z[j]
            if period > 0.0:
                if da > 0.5 * period:
                    da -= period
                    dz -= period
                elif da < -0.5 * period:
                    da += period
                    dz += period
            r = abs(dz) / abs(da)
            if r < mn:
                mn = r
            if r > mx:
                mx = r
        lo[i] = mn
        hi[i] = mx
    return lo.min(), hi.max()
