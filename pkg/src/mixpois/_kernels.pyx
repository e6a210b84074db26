# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops.  Must stay output-identical to ``_fallback.py``."""

import numpy as np
from libc.math cimport floor, log, lgamma, fabs, sqrt

ctypedef long long i64


def poisson_inversion(const double[:] lam, const double[:] p0, const double[:] u,
                      long max_k):
    """Sequential-search inversion; ``p0[i] = exp(-lam[i])``."""
    cdef Py_ssize_t i, n = lam.shape[0]
    cdef i64[:] out = np.zeros(n, dtype=np.int64)
    cdef double p, F
    cdef long k
    for i in range(n):
        p = p0[i]
        F = p
        k = 0
        while u[i] > F and k < max_k:
            k += 1
            p *= lam[i] / k
            F += p
        out[i] = k
    return np.asarray(out)


def ptrs_round(const double[:] lam, const double[:] loglam,
               const double[:] U, const double[:] V):
    """One attempt of transformed rejection with squeeze per mean.

    Returns ``(k, accepted)``; ``k`` is meaningful only where accepted.
    """
    cdef Py_ssize_t i, n = lam.shape[0]
    cdef i64[:] out = np.zeros(n, dtype=np.int64)
    cdef unsigned char[:] ok = np.zeros(n, dtype=np.uint8)
    cdef double slam, b, a, invalpha, vr, us, uu, v, kk
    for i in range(n):
        slam = sqrt(lam[i])
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        uu = U[i] - 0.5
        v = V[i]
        us = 0.5 - fabs(uu)
        kk = floor((2.0 * a / us + b) * uu + lam[i] + 0.43)
        if us >= 0.07 and v <= vr:
            out[i] = <i64>kk
            ok[i] = 1
            continue
        if kk < 0 or (us < 0.013 and v > us):
            continue
        if (log(v) + log(invalpha) - log(a / (us * us) + b)
                <= -lam[i] + kk * loglam[i] - lgamma(kk + 1.0)):
            out[i] = <i64>kk
            ok[i] = 1
    return np.asarray(out), np.asarray(ok).astype(bool)


def ks_sorted(const double[:] z, const double[:] F, const double[:] F_left):
    """Two-sided KS distance for sorted samples ``z``.

    ``F[i]`` and ``F_left[i]`` are the model CDF and its left limit at z[i].
    """
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t i = 0, j
    cdef double d = 0.0, below, upto, t
    while i < n:
        j = i
        while j + 1 < n and z[j + 1] == z[i]:
            j += 1
        below = <double>i / n
        upto = <double>(j + 1) / n
        t = fabs(below - F_left[i])
        if t > d:
            d = t
        t = fabs(upto - F[i])
        if t > d:
            d = t
        i = j + 1
    return d
