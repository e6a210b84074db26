import math

import numpy as np
import pytest
from scipy import stats

from mixpois import kernels
from mixpois.kernels import backend_module, ks_sorted, poisson_sample

try:
    backend_module("compiled")
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

BACKENDS = ["python"] + (["compiled"] if HAVE_COMPILED else [])
needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")


@needs_compiled
@pytest.mark.parametrize("lam", [0.0, 0.3, 5.0, 29.99, 30.0, 31.5, 200.0, 1e5])
def test_backends_draw_identical_values(lam):
    means = np.full(50_000, lam)
    a = poisson_sample(means, np.random.default_rng(7), backend_module("compiled"))
    b = poisson_sample(means, np.random.default_rng(7), backend_module("python"))
    assert np.array_equal(a, b)


@needs_compiled
def test_backends_identical_on_mixed_means():
    rng = np.random.default_rng(1)
    means = rng.gamma(2.0, 40.0, 100_000)
    a = poisson_sample(means, np.random.default_rng(9), backend_module("compiled"))
    b = poisson_sample(means, np.random.default_rng(9), backend_module("python"))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_mean_gives_zero(backend):
    y = poisson_sample(np.zeros(1000), np.random.default_rng(0), backend_module(backend))
    assert not y.any()


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("lam", [0.7, 4.0, 17.0, 29.0, 30.0, 45.0, 400.0])
def test_poisson_pmf_goodness_of_fit(backend, lam):
    # every cell with expected mass >= 1e-3 within 4 binomial standard errors
    n = 200_000
    y = poisson_sample(np.full(n, lam), np.random.default_rng(int(lam * 10) + 3),
                       backend_module(backend))
    counts = np.bincount(y)
    for k in range(counts.size):
        p = stats.poisson.pmf(k, lam)
        if p < 1e-3:
            continue
        assert abs(counts[k] / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_poisson_mean_band():
    n = 100_000
    y = poisson_sample(np.full(n, 4.0), np.random.default_rng(5))
    assert abs(y.mean() - 4.0) <= 3 * math.sqrt(4.0 / n)


def test_poisson_rejects_bad_means():
    with pytest.raises(ValueError):
        poisson_sample(np.array([-1.0]), np.random.default_rng(0))
    with pytest.raises(ValueError):
        poisson_sample(np.array([np.nan]), np.random.default_rng(0))


@pytest.mark.parametrize("backend", BACKENDS)
def test_ks_sorted_handles_ties(backend):
    impl = backend_module(backend)
    z = np.array([0.0, 0.0, 0.0])
    step = np.ones(3)
    step_left = np.zeros(3)
    assert ks_sorted(z, step, step_left, impl) == 0.0
    assert ks_sorted(np.array([0.0]), np.array([0.5]), np.array([0.5]), impl) == 0.5
    # ties: F_n jumps from 1/4 to 3/4 at z=1
    z = np.array([0.0, 1.0, 1.0, 2.0])
    F = np.array([0.25, 0.5, 0.5, 1.0])
    assert ks_sorted(z, F, F, impl) == pytest.approx(0.25)


@needs_compiled
def test_ks_backends_agree():
    rng = np.random.default_rng(3)
    z = np.sort(np.round(rng.normal(size=20_000), 2))
    F = stats.norm.cdf(z)
    a = ks_sorted(z, F, F, backend_module("compiled"))
    b = ks_sorted(z, F, F, backend_module("python"))
    assert a == b
