import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from mixpois.limit_lab import (
    ExperimentConfig,
    NormalVarianceMixtureCDF,
    centered_statistic,
    draw_coupled,
    ks_statistic,
    mixture_cdf,
    run_clt_experiment,
    run_multivariate_experiment,
    run_point_mass_experiment,
    run_scaling_experiment,
    run_simulation_experiment,
    run_wrong_centering_experiment,
)
from mixpois.mixed_poisson import (
    ComonotoneMixing,
    IndependentMixing,
    MixedPoissonModel,
    MultiMixedPoissonModel,
)
from mixpois.mixing import Degenerate, Discrete, Gamma, LogNormal, ZeroInflated


def gamma_mixture_cdf_oracle(z, shape, rate):
    f = lambda x: special.ndtr(z / math.sqrt(x)) * stats.gamma.pdf(x, shape, scale=1 / rate)
    return integrate.quad(f, 0, np.inf, epsabs=1e-13, limit=400)[0]


# -- mixture cdf ------------------------------------------------------------

def test_mixture_cdf_examples():
    assert mixture_cdf(NormalVarianceMixtureCDF(Degenerate(1.0)), 0.0) == pytest.approx(0.5)
    two = NormalVarianceMixtureCDF(Discrete(((1.0, 0.5), (4.0, 0.5))))
    expected = 0.5 * special.ndtr(2.0) + 0.5 * special.ndtr(1.0)
    assert mixture_cdf(two, 2.0) == pytest.approx(expected, abs=1e-14)
    assert mixture_cdf(two, 2.0) == pytest.approx(0.90930, abs=5e-6)
    zi = NormalVarianceMixtureCDF(ZeroInflated(0.3, Gamma(2.0, 1.0)))
    assert zi.jump(0.0) == 0.3
    assert zi(0.0) - zi.left(0.0) == pytest.approx(0.3, abs=1e-12)
    assert zi.jump(1.0) == 0.0


@pytest.mark.parametrize("z", [-3.0, -0.7, 0.0, 0.4, 2.5])
def test_gamma_mixture_vs_scipy_quad(z):
    m = NormalVarianceMixtureCDF(Gamma(2.0, 1.0))
    assert m(z) == pytest.approx(gamma_mixture_cdf_oracle(z, 2.0, 1.0), abs=1e-9)


def test_exponential_mixture_is_laplace():
    # N(0, X) with X ~ exponential(rate b) is Laplace with scale 1/sqrt(2b)
    for b in (1.0, 3.0):
        z = np.linspace(-6, 6, 25)
        m = NormalVarianceMixtureCDF(Gamma(1.0, b))
        ref = stats.laplace.cdf(z, scale=1 / math.sqrt(2 * b))
        assert np.max(np.abs(m(z) - ref)) <= 1e-9


def test_tabulated_path_matches_closed_form():
    # more than direct_max points goes through the verified interpolation grid
    z = np.linspace(-5, 5, 2001)
    m = NormalVarianceMixtureCDF(Gamma(1.0, 1.0))
    ref = stats.laplace.cdf(z, scale=1 / math.sqrt(2))
    assert np.max(np.abs(m(z) - ref)) <= 2e-7


@pytest.mark.parametrize("d", [Degenerate(1.0), Gamma(2.0, 1.0), Gamma(0.5, 2.0),
                               Discrete(((1.0, 0.5), (4.0, 0.5))),
                               ZeroInflated(0.3, Gamma(2.0, 1.0)), LogNormal(0.0, 0.5)],
                         ids=str)
def test_mixture_cdf_monotone_and_limits(d):
    m = NormalVarianceMixtureCDF(d)
    z = np.linspace(-12, 12, 4001)
    F = m(z)
    assert np.all(np.diff(F) >= -1e-12)
    assert F[0] < 1e-6 and F[-1] > 1 - 1e-6
    # symmetry of a centered normal mixture
    assert np.allclose(m(-z), 1 - m.left(z), atol=1e-9)


# -- KS ---------------------------------------------------------------------

def test_ks_examples():
    step = NormalVarianceMixtureCDF(Discrete(((0.0, 1.0),)))
    assert ks_statistic([0.0] * 10, step) == 0.0
    assert ks_statistic([0.0], special.ndtr) == pytest.approx(0.5)
    rng = np.random.default_rng(17)
    n = 100_000
    assert ks_statistic(rng.standard_normal(n), special.ndtr) < 1.95 / math.sqrt(n)


def test_ks_matches_scipy_for_continuous_cdf():
    x = np.random.default_rng(5).standard_normal(5000)
    assert ks_statistic(x, special.ndtr) == pytest.approx(
        stats.kstest(x, "norm").statistic, abs=1e-12)


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_statistic([], special.ndtr)


# -- harness ----------------------------------------------------------------

def test_draws_independent_of_worker_count():
    model = MixedPoissonModel(Gamma(2.0, 1.0), 50.0)
    a = draw_coupled(model, 120_000, 42, (9, 1), workers=1)
    b = draw_coupled(model, 120_000, 42, (9, 1), workers=3)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = draw_coupled(model, 120_000, 43, (9, 1), workers=1)
    assert not np.array_equal(a.y, c.y)


def test_centered_statistic_needs_coupled_samples():
    model = MixedPoissonModel(Degenerate(1.0), 10.0)
    batch = draw_coupled(model, 1000, 1, (0,))
    assert centered_statistic(batch, 10.0).shape == (1000,)
    with pytest.raises(TypeError):
        centered_statistic(batch.y, 10.0)


def test_config_validation():
    model = MixedPoissonModel(Gamma(2.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(model, (10.0, 10.0))
    with pytest.raises(ValueError):
        ExperimentConfig(model, ())
    with pytest.raises(ValueError):
        ExperimentConfig(model, (10.0,), sample_size=10)
    with pytest.raises(ValueError):
        ExperimentConfig(model, (10.0,), master_seed=2 ** 64)


# -- experiments at small N -------------------------------------------------

def small_cfg(mixing, rhos, **kw):
    kw.setdefault("sample_size", 20_000)
    kw.setdefault("master_seed", 7)
    return ExperimentConfig(MixedPoissonModel(mixing, 1.0), tuple(rhos), **kw)


def test_simulation_experiment_passes():
    report = run_simulation_experiment(small_cfg(Gamma(2.0, 1.0), (1.0, 10.0)))
    assert report.passed, [v for v in report.verdicts if not v.passed]
    assert report.stat(0, "factorial_2").exact == 6.0


def test_scaling_experiment_passes_and_gap_is_exact():
    report = run_scaling_experiment(small_cfg(Discrete(((1.0, 0.5), (3.0, 0.5))),
                                              (10.0, 100.0)))
    assert report.passed
    for i in range(2):
        for s in range(1, 5):
            st = report.stat(i, f"scaled_raw_{s}_gap")
            assert st.estimate == pytest.approx(st.exact, rel=1e-10, abs=1e-14)


def test_clt_experiment_runs_and_notes_indeterminacy():
    report = run_clt_experiment(small_cfg(LogNormal(0.0, 0.25), (100.0,)))
    assert any("not determined by its moments" in n for n in report.notes)
    assert report.stat(0, "ks").estimate < 0.05


def test_clt_ks_decreases_on_average():
    means = []
    for rho in (10.0, 100.0, 1000.0):
        vals = [run_clt_experiment(small_cfg(Gamma(2.0, 1.0), (rho,), master_seed=s,
                                             max_moment_order=1)).stat(0, "ks").estimate
                for s in range(5)]
        means.append(np.mean(vals))
    assert means[0] >= means[1] >= means[2]


def test_experiments_are_deterministic():
    cfg = small_cfg(ZeroInflated(0.3, Gamma(2.0, 1.0)), (10.0, 100.0))
    assert run_clt_experiment(cfg).to_json() == run_clt_experiment(cfg).to_json()
    assert run_scaling_experiment(cfg).to_csv() == run_scaling_experiment(cfg).to_csv()


def test_wrong_centering():
    model = MixedPoissonModel(Gamma(2.0, 1.0), 100.0)
    report = run_wrong_centering_experiment(model, 50_000, 3)
    assert report.verdict("rho=100/ks_Xstar_fails").passed
    with pytest.raises(ValueError):
        run_wrong_centering_experiment(MixedPoissonModel(Degenerate(1.0), 100.0), 10_000, 3)
    with pytest.raises(ValueError):
        run_wrong_centering_experiment(MixedPoissonModel(Gamma(2.0, 1.0), 37.0), 10_000, 3)


def test_point_mass():
    model = MixedPoissonModel(ZeroInflated(0.3, Gamma(2.0, 1.0)), 1.0)
    report = run_point_mass_experiment(model, (10.0, 100.0), 20_000, 5)
    assert report.passed
    assert report.verdict("limit_cdf/jump_at_0").lhs == 0.3
    with pytest.raises(ValueError):
        run_point_mass_experiment(MixedPoissonModel(Gamma(2.0, 1.0), 1.0), (10.0,), 1000, 5)


def test_multivariate_experiment():
    model = MultiMixedPoissonModel(IndependentMixing((Gamma(2.0, 1.0), Degenerate(1.0))),
                                   (100.0, 1000.0))
    report = run_multivariate_experiment(ExperimentConfig(model, (), sample_size=20_000,
                                                          master_seed=2))
    assert report.verdict("cross/E(W12)/exact").passed
    with pytest.raises(TypeError):
        run_multivariate_experiment(small_cfg(Gamma(2.0, 1.0), (10.0,)))
