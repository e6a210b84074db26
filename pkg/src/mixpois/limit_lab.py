"""Monte Carlo checks of the large-rho behaviour of MPo(rho X).

Every experiment draws coupled pairs (X, Y) so that Y can be centered by the
very X that generated it, compares empirical statistics with exact
finite-rho values (the sharp check) and records the rho -> infinity limit
alongside.

Random streams: the sample is cut into chunks of ``CHUNK_SIZE`` draws and
chunk ``c`` of stream ``key`` uses
``PCG64(SeedSequence(master_seed, spawn_key=(*key, c)))``.  Results
therefore do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from . import kernels
from .combinatorics import double_factorial_odd, falling_factorial, stirling2
from .mixed_poisson import CoupledBatch, MixedPoissonModel, MultiMixedPoissonModel
from .mixing import MixingDistribution, ZeroInflated
from .quadrature import NumericalError, adaptive_gk15
from .report import ExperimentReport, Stat, check

__all__ = [
    "CHUNK_SIZE",
    "DEFAULT_KS_THRESHOLDS",
    "SE_BAND",
    "ExperimentConfig",
    "NormalVarianceMixtureCDF",
    "mixture_cdf",
    "ks_statistic",
    "draw_coupled",
    "draw_mixing",
    "centered_statistic",
    "run_simulation_experiment",
    "run_scaling_experiment",
    "run_clt_experiment",
    "run_wrong_centering_experiment",
    "run_point_mass_experiment",
    "run_multivariate_experiment",
]

CHUNK_SIZE = 50_000
SE_BAND = 4.0
DEFAULT_KS_THRESHOLDS = {10.0: 0.05, 100.0: 0.02, 1000.0: 0.012}
DEFAULT_LIMIT_REL_TOL = {2: 0.05, 4: 0.10}

# stream tags, one per experiment kind
_SIMULATE, _SCALING, _CLT, _WRONG, _POINT, _MULTI = range(1, 7)


# -- normal variance mixture ----------------------------------------------

@dataclass(frozen=True)
class NormalVarianceMixtureCDF:
    """CDF of N(0, X): z -> E[Phi(z / sqrt(X)); X > 0] + P{X = 0} 1{z >= 0}.

    Atoms of the mixing law are summed exactly.  Absolutely continuous parts
    are integrated by adaptive quadrature; for large batches of z the
    continuous part is tabulated on a grid that is refined until linear
    interpolation is checked to ``tol`` at every interval midpoint.
    """

    mixing: MixingDistribution
    tol: float = 1e-7
    direct_max: int = 256

    def __call__(self, z):
        return self._evaluate(z, left=False)

    def left(self, z):
        """Left limit F(z-)."""
        return self._evaluate(z, left=True)

    def jump(self, z: float) -> float:
        """Size of the atom of N(0, X) at z; only z = 0 can carry one."""
        return self.mixing.prob_zero if z == 0 else 0.0

    def _evaluate(self, z, left: bool):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.zeros_like(zz)
        for v, w in self.mixing.atoms():
            if v > 0:
                out += w * ndtr(zz / math.sqrt(v))
            elif left:
                out += w * (zz > 0)
            else:
                out += w * (zz >= 0)
        for w, dist in self.mixing.continuous_parts():
            out += w * self._continuous(dist, zz)
        return float(out[0]) if scalar else out

    def _continuous(self, dist, z: np.ndarray) -> np.ndarray:
        uniq, inverse = np.unique(z, return_inverse=True)
        if uniq.size <= self.direct_max:
            vals = _continuous_mixture_cdf(dist, uniq, self.tol)
        else:
            vals = _tabulated_mixture_cdf(dist, uniq, self.tol)
        return vals[inverse].reshape(z.shape)


def _continuous_mixture_cdf(dist, z: np.ndarray, tol: float) -> np.ndarray:
    # For z > 0, P{N sqrt(X) <= z} = 1/2 + 1/2 P{X <= z^2 / S^2} with S = |N|,
    # so only the CDF of X enters and the integrand stays bounded even when
    # the density of X is singular at zero.  With S = z e^v the density of S
    # becomes a bump of unit width at v = -log z and the CDF factor
    # F(e^{-2v}) no longer moves with z.
    out = np.where(z > 0, 1.0, 0.0)
    out[z == 0] = 0.5
    inner = np.isfinite(z) & (z != 0)
    a = np.abs(z[inner])
    if a.size == 0:
        return out
    # below v_lo the integrand is at most a e^v; above v_hi phi(a e^v) ~ 0
    v_lo = math.log(1e-2 * tol / float(a.max()))
    v_hi = math.log(40.0 / max(float(a.min()), 1e-300))

    def integrand(v):
        ev = np.exp(v)
        F = dist.cdf(np.exp(-2.0 * v))
        s = a[None, :] * ev[:, None]
        return F[:, None] * s * np.exp(-0.5 * s * s) * math.sqrt(2.0 / math.pi)

    try:
        half = adaptive_gk15(integrand, v_lo, v_hi, atol=tol, max_level=20)
    except NumericalError as exc:
        raise NumericalError("normal variance mixture CDF", exc.achieved) from None
    half = np.clip(half, 0.0, 1.0)
    out[inner] = np.where(z[inner] > 0, 0.5 + 0.5 * half, 0.5 - 0.5 * half)
    return out


def _tabulated_mixture_cdf(dist, z: np.ndarray, tol: float,
                           max_rounds: int = 40) -> np.ndarray:
    lo, hi = float(z[0]), float(z[-1])
    grid = np.linspace(lo, hi, 1025)
    if lo < 0 < hi:
        grid = np.union1d(grid, [0.0])
    vals = _continuous_mixture_cdf(dist, grid, tol / 4)
    for _ in range(max_rounds):
        mids = 0.5 * (grid[:-1] + grid[1:])
        mid_vals = _continuous_mixture_cdf(dist, mids, tol / 4)
        interp = 0.5 * (vals[:-1] + vals[1:])
        bad = np.abs(interp - mid_vals) > tol / 2
        if not bad.any():
            return np.interp(z, grid, vals)
        grid = np.concatenate([grid, mids[bad]])
        vals = np.concatenate([vals, mid_vals[bad]])
        order = np.argsort(grid, kind="stable")
        grid, vals = grid[order], vals[order]
    raise NumericalError("tabulated mixture CDF did not meet its tolerance",
                         float(np.max(np.abs(interp - mid_vals))))


def mixture_cdf(m: NormalVarianceMixtureCDF, z):
    return m(z)


def ks_statistic(samples, cdf: Callable) -> float:
    """Two-sided Kolmogorov-Smirnov distance sup |F_n - F|.

    At each distinct sample value z the empirical left limit F_n(z-) is
    compared with the model's left limit (``cdf.left`` when available, which
    matters at atoms) and F_n(z) with F(z).
    """
    z = np.sort(np.asarray(samples, dtype=float))
    if z.size == 0:
        raise ValueError("ks_statistic needs at least one sample")
    F = np.asarray(cdf(z), dtype=float)
    left = getattr(cdf, "left", None)
    F_left = np.asarray(left(z), dtype=float) if left is not None else F
    return kernels.ks_sorted(z, F, F_left)


# -- sampling harness -------------------------------------------------------

def _stream(master_seed: int, key: Sequence[int], chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(*key, chunk))
    return np.random.Generator(np.random.PCG64(ss))


def _chunked(n: int, master_seed: int, key, workers, job):
    sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]

    def run(c):
        return job(_stream(master_seed, key, c), sizes[c])

    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(sizes) == 1:
        return [run(c) for c in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def draw_coupled(model, n: int, master_seed: int, key: Sequence[int],
                 workers: int | None = None):
    """N coupled draws; a :class:`CoupledBatch` or ``(X, Y)`` matrices."""
    if isinstance(model, MultiMixedPoissonModel):
        parts = _chunked(n, master_seed, key, workers,
                         lambda rng, size: model.sample_coupled_vector(rng, size))
        return (np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]))
    parts = _chunked(n, master_seed, key, workers,
                     lambda rng, size: model.sample_coupled(rng, size))
    return CoupledBatch(np.concatenate([p.x for p in parts]),
                        np.concatenate([p.y for p in parts]))


def draw_mixing(mixing: MixingDistribution, n: int, master_seed: int,
                key: Sequence[int], workers: int | None = None) -> np.ndarray:
    parts = _chunked(n, master_seed, key, workers,
                     lambda rng, size: np.asarray(mixing.sample(rng, size), dtype=float))
    return np.concatenate(parts)


def centered_statistic(samples: CoupledBatch, rho: float) -> np.ndarray:
    """Z = (Y - rho X) / sqrt(rho); needs the coupled X of every Y."""
    if not isinstance(samples, CoupledBatch) or samples.x is None:
        raise TypeError("centering needs coupled (x, y) samples, not marginal counts")
    return (samples.y - rho * samples.x) / math.sqrt(rho)


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    model: MixedPoissonModel | MultiMixedPoissonModel
    rho_schedule: tuple[float, ...] = ()
    sample_size: int = 200_000
    master_seed: int = 0
    thresholds: tuple[float, ...] = (0.5, 1.0)
    max_moment_order: int = 4
    ks_thresholds: Mapping[float, float] = field(
        default_factory=lambda: dict(DEFAULT_KS_THRESHOLDS))
    limit_rho: float = 1000.0
    limit_rel_tol: Mapping[int, float] = field(
        default_factory=lambda: dict(DEFAULT_LIMIT_REL_TOL))
    workers: int | None = None

    def __post_init__(self):
        sched = tuple(float(r) for r in self.rho_schedule)
        object.__setattr__(self, "rho_schedule", sched)
        object.__setattr__(self, "thresholds", tuple(float(a) for a in self.thresholds))
        if not isinstance(self.model, MultiMixedPoissonModel):
            if not sched:
                raise ValueError("rho_schedule must not be empty")
        if any(r <= 0 for r in sched):
            raise ValueError("rho_schedule entries must be positive")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("rho_schedule must be strictly increasing")
        if self.sample_size < 1000:
            raise ValueError("sample_size must be at least 1000")
        if any(a <= 0 for a in self.thresholds):
            raise ValueError("thresholds must be positive")
        if self.max_moment_order < 1:
            raise ValueError("max_moment_order must be positive")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def mixing(self) -> MixingDistribution:
        return self.model.mixing

    def ks_threshold(self, rho: float) -> float | None:
        return self.ks_thresholds.get(float(rho))

    def echo(self) -> dict:
        return {
            "model": self.model.to_config(),
            "rho_schedule": list(self.rho_schedule),
            "N": self.sample_size,
            "seed": self.master_seed,
            "thresholds": list(self.thresholds),
            "max_moment_order": self.max_moment_order,
        }


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.shape[0]
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se


def _band(se: float, exact: float) -> float:
    # floating-point slack so zero-variance statistics compare cleanly
    return SE_BAND * se + 1e-12 * max(1.0, abs(exact))


def _moment_check(report, stats, tag, name, values, exact, limit=None):
    est, se = _mean_se(values)
    stats.append(Stat(name, est, se, exact, limit))
    report.verdicts.append(check(f"{tag}/{name}/exact", abs(est - exact), "<=",
                                 _band(se, exact)))
    return est, se


def _model_at(cfg: ExperimentConfig, rho: float) -> MixedPoissonModel:
    return MixedPoissonModel(cfg.model.mixing, rho)


def _determinacy_note(report: ExperimentReport, mixing: MixingDistribution):
    if not mixing.moment_determinate:
        report.notes.append(
            f"{mixing.describe()} is not determined by its moments; the limit "
            "results assume a determinate mixing, so limit comparisons here are "
            "outside their hypotheses")


# -- experiments ------------------------------------------------------------

def run_simulation_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Empirical pmf and factorial / raw / centered moments vs exact formulas."""
    report = ExperimentReport("simulate", cfg.echo())
    n = cfg.sample_size
    for i, rho in enumerate(cfg.rho_schedule):
        model = _model_at(cfg, rho)
        batch = draw_coupled(model, n, cfg.master_seed, (_SIMULATE, i), cfg.workers)
        y = batch.y.astype(float)
        tag = f"rho={rho:g}"
        stats: list[Stat] = []
        w = y - rho * batch.x
        for s in range(1, cfg.max_moment_order + 1):
            _moment_check(report, stats, tag, f"factorial_{s}",
                          falling_factorial(y, s), model.factorial_moment(s))
            _moment_check(report, stats, tag, f"raw_{s}", y ** s, model.raw_moment(s))
            _moment_check(report, stats, tag, f"centered_{s}", w ** s,
                          model.centered_moment(s))
        # second centered moment on the Y/rho - X scale
        _moment_check(report, stats, tag, "W2_scaled", (w / rho) ** 2,
                      model.mixing.moment(1) / rho)
        counts = np.bincount(batch.y)
        for l in range(counts.size):
            p = model.pmf(l)
            if p < 1e-3:
                continue
            freq = counts[l] / n
            se = math.sqrt(p * (1 - p) / n)
            stats.append(Stat(f"pmf_{l}", freq, se, p))
            report.verdicts.append(check(f"{tag}/pmf_{l}", abs(freq - p), "<=",
                                         SE_BAND * se))
        report.records.append({"rho": rho, "stats": stats})
    return report


def run_scaling_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Moments of Y/rho against E(X^s), and the Chebyshev tail bound."""
    report = ExperimentReport("scaling", cfg.echo())
    _determinacy_note(report, cfg.mixing)
    mixing = cfg.mixing
    mu = [mixing.moment(s) for s in range(cfg.max_moment_order + 1)]
    n = cfg.sample_size
    for i, rho in enumerate(cfg.rho_schedule):
        model = _model_at(cfg, rho)
        batch = draw_coupled(model, n, cfg.master_seed, (_SCALING, i), cfg.workers)
        ratio = batch.y / rho
        w = ratio - batch.x
        tag = f"rho={rho:g}"
        stats: list[Stat] = []
        for s in range(1, cfg.max_moment_order + 1):
            exact = model.raw_moment(s) / rho ** s
            gap = math.fsum(stirling2(s, j) * mu[j] / rho ** (s - j) for j in range(s))
            est, se = _moment_check(report, stats, tag, f"scaled_raw_{s}",
                                    ratio ** s, exact, limit=mu[s])
            stats.append(Stat(f"scaled_raw_{s}_gap", exact - mu[s], None, gap))
        _moment_check(report, stats, tag, "W_mean", w, 0.0)
        _moment_check(report, stats, tag, "W2", w ** 2, mu[1] / rho)
        abs_w = np.abs(w)
        for a in cfg.thresholds:
            tail = float(np.mean(abs_w >= a))
            bound = mu[1] / (rho * a * a)
            stats.append(Stat(f"tail_a={a:g}", tail, math.sqrt(tail * (1 - tail) / n),
                              bound=bound))
            report.verdicts.append(check(f"{tag}/chebyshev_a={a:g}", tail, "<=",
                                         bound + SE_BAND * math.sqrt(bound / n)))
        report.records.append({"rho": rho, "stats": stats})
    return report


def _limit_moment(mixing: MixingDistribution, s: int) -> float:
    if s % 2:
        return 0.0
    m = s // 2
    return double_factorial_odd(m) * mixing.moment(m)


def run_clt_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """KS distance of (Y - rho X)/sqrt(rho) to N(0, X), plus its moments."""
    report = ExperimentReport("clt", cfg.echo())
    _determinacy_note(report, cfg.mixing)
    mixing = cfg.mixing
    limit_cdf = NormalVarianceMixtureCDF(mixing)
    n = cfg.sample_size
    for i, rho in enumerate(cfg.rho_schedule):
        model = _model_at(cfg, rho)
        batch = draw_coupled(model, n, cfg.master_seed, (_CLT, i), cfg.workers)
        z = centered_statistic(batch, rho)
        tag = f"rho={rho:g}"
        stats: list[Stat] = []
        ks = ks_statistic(z, limit_cdf)
        thr = cfg.ks_threshold(rho)
        stats.append(Stat("ks", ks, bound=thr))
        if thr is not None:
            report.verdicts.append(check(f"{tag}/ks", ks, "<=", thr))
        for s in range(1, cfg.max_moment_order + 1):
            exact = model.centered_moment(s) / rho ** (s / 2)
            limit = _limit_moment(mixing, s)
            est, se = _moment_check(report, stats, tag, f"Z_{s}", z ** s, exact, limit)
            if rho < cfg.limit_rho:
                continue
            if s % 2:
                report.verdicts.append(check(f"{tag}/Z_{s}/limit", abs(est), "<=",
                                             abs(exact) + SE_BAND * se))
            elif s in cfg.limit_rel_tol:
                report.verdicts.append(check(f"{tag}/Z_{s}/limit", abs(est - limit), "<=",
                                             cfg.limit_rel_tol[s] * limit))
        report.records.append({"rho": rho, "stats": stats})
    return report


def run_wrong_centering_experiment(model: MixedPoissonModel, N: int, seed: int,
                                   ks_threshold: float | None = None,
                                   workers: int | None = None) -> ExperimentReport:
    """Centering by an independent copy X* of X breaks the limit law."""
    mixing = model.mixing
    mu1, mu2 = mixing.moment(1), mixing.moment(2)
    if mu2 - mu1 * mu1 <= 1e-12 * max(mu2, 1.0):
        raise ValueError(
            f"{mixing.describe()} has zero variance: an independent copy equals X "
            "and both centerings coincide")
    rho = model.rho
    if ks_threshold is None:
        ks_threshold = DEFAULT_KS_THRESHOLDS.get(float(rho))
    if ks_threshold is None:
        raise ValueError(f"no KS threshold known for rho={rho:g}; pass one explicitly")
    report = ExperimentReport("wrong-centering", {
        "model": model.to_config(), "N": N, "seed": seed, "ks_threshold": ks_threshold})
    batch = draw_coupled(model, N, seed, (_WRONG, 0), workers)
    x_star = draw_mixing(mixing, N, seed, (_WRONG, 1), workers)
    y = batch.y.astype(float)
    tag = f"rho={rho:g}"
    stats: list[Stat] = []
    exy, _ = _moment_check(report, stats, tag, "E(XY)/rho", batch.x * y / rho, mu2)
    exsy, _ = _moment_check(report, stats, tag, "E(X*Y)/rho", x_star * y / rho, mu1 * mu1)
    stats.append(Stat("E(XY)-E(X*Y)", rho * (exy - exsy), None, rho * (mu2 - mu1 * mu1)))
    limit_cdf = NormalVarianceMixtureCDF(mixing)
    ks_right = ks_statistic((y - rho * batch.x) / math.sqrt(rho), limit_cdf)
    ks_wrong = ks_statistic((y - rho * x_star) / math.sqrt(rho), limit_cdf)
    stats.append(Stat("ks_centered_by_X", ks_right, bound=ks_threshold))
    stats.append(Stat("ks_centered_by_Xstar", ks_wrong, bound=ks_threshold))
    report.verdicts.append(check(f"{tag}/ks_X_passes", ks_right, "<=", ks_threshold))
    report.verdicts.append(check(f"{tag}/ks_Xstar_fails", ks_wrong, ">", ks_threshold))
    report.records.append({"rho": rho, "stats": stats})
    return report


def run_point_mass_experiment(model: MixedPoissonModel, rho_schedule: Sequence[float],
                              N: int, seed: int,
                              workers: int | None = None) -> ExperimentReport:
    """P{Z = 0} >= p when the mixing has an atom p at zero."""
    mixing = model.mixing
    if not isinstance(mixing, ZeroInflated):
        raise ValueError("point-mass experiment needs zero_inflated mixing")
    p = mixing.p
    report = ExperimentReport("point-mass", {
        "model": model.to_config(), "rho_schedule": [float(r) for r in rho_schedule],
        "N": N, "seed": seed})
    limit_cdf = NormalVarianceMixtureCDF(mixing)
    jump = limit_cdf.jump(0.0)
    report.verdicts.append(check("limit_cdf/jump_at_0", jump, "==", p))
    diff = limit_cdf(0.0) - limit_cdf.left(0.0)
    report.verdicts.append(check("limit_cdf/F(0)-F(0-)", abs(diff - p), "<=", 1e-12))
    lower = p - SE_BAND * math.sqrt(p * (1 - p) / N)
    for i, rho in enumerate(rho_schedule):
        m = MixedPoissonModel(mixing, float(rho))
        batch = draw_coupled(m, N, seed, (_POINT, i), workers)
        zero = (batch.y - rho * batch.x) == 0
        freq = float(np.mean(zero))
        stats = [Stat("P(Z=0)", freq, math.sqrt(freq * (1 - freq) / N), bound=p),
                 Stat("limit_cdf_jump", jump, None, p)]
        report.verdicts.append(check(f"rho={rho:g}/P(Z=0)", freq, ">=", lower))
        report.records.append({"rho": float(rho), "stats": stats})
    return report


def run_multivariate_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Cross products W_j W_k average to zero; each coordinate obeys its own CLT."""
    model = cfg.model
    if not isinstance(model, MultiMixedPoissonModel):
        raise TypeError("multivariate experiment needs a MultiMixedPoissonModel")
    report = ExperimentReport("multivariate", cfg.echo())
    n = cfg.sample_size
    X, Y = draw_coupled(model, n, cfg.master_seed, (_MULTI, 0), cfg.workers)
    rhos = np.asarray(model.rhos)
    W = Y - rhos[None, :] * X
    Z = W / np.sqrt(rhos)[None, :]
    stats: list[Stat] = []
    for j in range(model.dim):
        mixing_j = model.joint_mixing.marginal(j)
        ks = ks_statistic(Z[:, j], NormalVarianceMixtureCDF(mixing_j))
        thr = cfg.ks_threshold(rhos[j])
        stats.append(Stat(f"ks_{j + 1}", ks, bound=thr))
        if thr is not None:
            report.verdicts.append(check(f"coord{j + 1}/ks", ks, "<=", thr))
    for j in range(model.dim):
        for k in range(j + 1, model.dim):
            pair = f"{j + 1}{k + 1}"
            _moment_check(report, stats, "cross", f"E(W{pair})", W[:, j] * W[:, k], 0.0)
            zj = Z[:, j] - Z[:, j].mean()
            zk = Z[:, k] - Z[:, k].mean()
            sj, sk = zj.std(), zk.std()
            r = float(np.mean(zj * zk) / (sj * sk))
            se_r = float(np.std(zj * zk, ddof=1) / (sj * sk) / math.sqrt(n))
            stats.append(Stat(f"corr(Z{j + 1},Z{k + 1})", r, se_r, 0.0))
            report.verdicts.append(check(f"cross/corr{pair}", abs(r), "<=", SE_BAND * se_r))
    report.records.append({"rho": [float(r) for r in rhos], "stats": stats})
    return report
