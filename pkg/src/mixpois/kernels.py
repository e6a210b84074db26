"""Hot loops: Poisson variate generation and the KS sweep.

The compiled extension ``mixpois._kernels`` is used when it imports;
otherwise the NumPy fallback.  Set ``MIXPOIS_PURE_PYTHON=1`` to force the
fallback.  ``BACKEND`` records which one is live.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

__all__ = ["BACKEND", "poisson_sample", "ks_sorted", "backend_module",
           "INVERSION_CUTOFF"]

INVERSION_CUTOFF = 30.0
_MAX_INVERSION_K = 400  # P(Poisson(30) > 400) is far below double precision


def _load():
    if os.environ.get("MIXPOIS_PURE_PYTHON", "") not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        return _fallback, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()


def backend_module(name: str):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def poisson_sample(lam, rng: np.random.Generator, impl=None) -> np.ndarray:
    """Exact Poisson draws for an array of means.

    Means below 30 use inversion by sequential search (one uniform each);
    larger means use transformed rejection with squeeze, drawing a fresh
    uniform pair per pending mean in each round.  Uniform consumption does
    not depend on the backend.
    """
    impl = impl or _impl
    lam = np.ascontiguousarray(lam, dtype=float)
    if lam.ndim != 1:
        raise ValueError("lam must be one-dimensional")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ValueError("Poisson means must be finite and nonnegative")
    out = np.zeros(lam.shape[0], dtype=np.int64)

    small = np.flatnonzero(lam < INVERSION_CUTOFF)
    if small.size:
        ls = lam[small]
        u = rng.random(small.size)
        out[small] = impl.poisson_inversion(ls, np.exp(-ls), u, _MAX_INVERSION_K)

    pending = np.flatnonzero(lam >= INVERSION_CUTOFF)
    if pending.size:
        lam_big = lam[pending]
        loglam_big = np.log(lam_big)
        sel = np.arange(pending.size)
        while pending.size:
            U = rng.random(pending.size)
            V = rng.random(pending.size)
            k, ok = impl.ptrs_round(lam_big[sel], loglam_big[sel], U, V)
            out[pending[ok]] = k[ok]
            pending = pending[~ok]
            sel = sel[~ok]
    return out


def ks_sorted(z, F, F_left, impl=None) -> float:
    impl = impl or _impl
    return float(impl.ks_sorted(np.ascontiguousarray(z, dtype=float),
                                np.ascontiguousarray(F, dtype=float),
                                np.ascontiguousarray(F_left, dtype=float)))
