"""Compiled extension vs NumPy fallback on the sampling and KS kernels.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Both backends consume the same uniforms, so every timed pair is also checked
for identical output.
"""

import argparse
import timeit

import numpy as np
from scipy.special import ndtr

from mixpois.kernels import backend_module, ks_sorted, poisson_sample


def cases(n):
    rng = np.random.default_rng(0)
    z = np.sort(np.round(rng.standard_normal(n), 3))
    F = ndtr(z)
    return {
        "poisson mean 5 (inversion)": lambda impl: poisson_sample(
            np.full(n, 5.0), np.random.default_rng(1), impl),
        "poisson mean 1000 (rejection)": lambda impl: poisson_sample(
            np.full(n, 1000.0), np.random.default_rng(1), impl),
        "poisson gamma(2,1) x 100": lambda impl: poisson_sample(
            100.0 * np.random.default_rng(2).gamma(2.0, 1.0, n), np.random.default_rng(1), impl),
        "ks, tied normal sample": lambda impl: ks_sorted(z, F, F, impl),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    try:
        compiled = backend_module("compiled")
    except ImportError:
        raise SystemExit("compiled extension not built; run pip install -e . first")
    python = backend_module("python")

    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':32s} {'compiled':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, fn in cases(args.n).items():
        a, b = fn(compiled), fn(python)
        assert np.array_equal(a, b), name
        tc = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fn(python), number=1, repeat=args.repeat))
        print(f"{name:32s} {tc * 1e3:8.1f}ms {tp * 1e3:8.1f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
