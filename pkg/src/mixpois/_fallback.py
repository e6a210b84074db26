"""NumPy versions of the compiled kernels in ``_kernels.pyx``.

Same arithmetic, same order of operations, so both backends produce the
same draws from the same uniforms.
"""

import numpy as np
from scipy.special import gammaln


def poisson_inversion(lam, p0, u, max_k):
    lam = np.asarray(lam, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.array(p0, dtype=float)
    F = p.copy()
    out = np.zeros(lam.shape[0], dtype=np.int64)
    active = np.flatnonzero(u > F)
    k = 0
    while active.size and k < max_k:
        k += 1
        p[active] *= lam[active] / k
        F[active] += p[active]
        out[active] = k
        active = active[u[active] > F[active]]
    return out


def ptrs_round(lam, loglam, U, V):
    lam = np.asarray(lam, dtype=float)
    slam = np.sqrt(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    uu = np.asarray(U) - 0.5
    v = np.asarray(V)
    us = 0.5 - np.abs(uu)
    kk = np.floor((2.0 * a / us + b) * uu + lam + 0.43)

    quick = (us >= 0.07) & (v <= vr)
    rejected = (kk < 0) | ((us < 0.013) & (v > us))
    ok = quick.copy()
    test = ~quick & ~rejected
    if test.any():
        t = np.flatnonzero(test)
        lhs = np.log(v[t]) + np.log(invalpha[t]) - np.log(a[t] / (us[t] * us[t]) + b[t])
        rhs = -lam[t] + kk[t] * np.asarray(loglam)[t] - gammaln(kk[t] + 1.0)
        ok[t] = lhs <= rhs
    out = np.where(ok, kk, 0.0).astype(np.int64)
    return out, ok


def ks_sorted(z, F, F_left):
    z = np.asarray(z)
    n = z.shape[0]
    # first index of each run of equal values, and one past its last index
    starts = np.flatnonzero(np.r_[True, z[1:] != z[:-1]])
    ends = np.r_[starts[1:], n]
    below = starts / n
    upto = ends / n
    d_left = np.abs(below - np.asarray(F_left)[starts])
    d_right = np.abs(upto - np.asarray(F)[starts])
    return float(max(d_left.max(), d_right.max()))
