"""Mixed Poisson distributions MPo(rho X) and a Monte Carlo limit lab."""

from .combinatorics import (
    IntPolynomial,
    assoc_stirling2,
    centered_poisson_moment_closed,
    centered_poisson_moment_recurrence,
    centered_poisson_moment_touchard,
    double_factorial_odd,
    enumerate_partitions_min_block,
    falling_factorial,
    stirling2,
    touchard_poly,
)
from .kernels import BACKEND
from .limit_lab import (
    ExperimentConfig,
    NormalVarianceMixtureCDF,
    ks_statistic,
    mixture_cdf,
    run_clt_experiment,
    run_multivariate_experiment,
    run_point_mass_experiment,
    run_scaling_experiment,
    run_simulation_experiment,
    run_wrong_centering_experiment,
)
from .mixed_poisson import (
    ComonotoneMixing,
    CoupledBatch,
    CoupledSample,
    IndependentMixing,
    JointTableMixing,
    MixedPoissonModel,
    MultiMixedPoissonModel,
)
from .mixing import Degenerate, Discrete, Gamma, LogNormal, MixingDistribution, ZeroInflated
from .quadrature import NumericalError
from .report import ExperimentReport, Verdict

__version__ = "0.1.0"
