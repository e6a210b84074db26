"""Catalogue of mixing distributions X >= 0.

Each entry knows its exact moments E(X^s), the Laplace-weighted moments
E(X^l exp(-rho X)) that drive the mixed Poisson pmf, and how to sample
itself from a caller-owned :class:`numpy.random.Generator`.

Gamma uses the (shape, rate) convention: density
``rate**shape x**(shape-1) exp(-rate x) / Gamma(shape)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import optimize, special, stats

from .quadrature import NumericalError, adaptive_gk15

__all__ = [
    "ConfigError",
    "MixingDistribution",
    "Degenerate",
    "Gamma",
    "Discrete",
    "ZeroInflated",
    "LogNormal",
    "moment",
    "sample",
    "laplace_weighted_moment",
    "mixing_from_config",
    "QUAD_TOL",
]

QUAD_TOL = 1e-10
QUAD_MAX_LEVEL = 20
_PROB_SUM_TOL = 1e-12


class ConfigError(ValueError):
    """A declarative config record is malformed; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _u_to_x(u):
    return u / (1.0 - u)


def _jacobian(u):
    return 1.0 / (1.0 - u) ** 2


class MixingDistribution:
    """Base class; concrete kinds are frozen dataclasses below."""

    kind: str = ""
    moment_determinate: bool = True

    def moment(self, s: int) -> float:
        raise NotImplementedError

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        raise NotImplementedError

    def laplace_weighted_moment(self, l: int, rho: float) -> float:
        return math.exp(self.log_laplace_weighted_moment(l, rho))

    def sample(self, rng: np.random.Generator, size: int | None = None):
        raise NotImplementedError

    @property
    def prob_zero(self) -> float:
        return sum(w for v, w in self.atoms() if v == 0.0)

    def atoms(self) -> list[tuple[float, float]]:
        """Point masses (value, weight) of the law."""
        return []

    def continuous_parts(self) -> list[tuple[float, MixingDistribution]]:
        """Absolutely continuous components as (weight, distribution)."""
        return []

    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def to_config(self) -> dict[str, Any]:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.describe()


def _check_order(s: int):
    if s < 0 or int(s) != s:
        raise ValueError(f"moment order must be a nonnegative integer, got {s}")


@dataclass(frozen=True)
class Degenerate(MixingDistribution):
    value: float

    kind = "degenerate"

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("degenerate value must be a finite nonnegative number")

    def moment(self, s: int) -> float:
        _check_order(s)
        return float(self.value) ** s

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        if self.value == 0.0:
            return 0.0 if l == 0 else -math.inf
        return l * math.log(self.value) - rho * self.value

    def laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        return float(self.value) ** l * math.exp(-rho * self.value)

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def atoms(self):
        return [(float(self.value), 1.0)]

    def to_config(self):
        return {"kind": self.kind, "value": self.value}

    def describe(self):
        return f"degenerate({self.value:g})"


@dataclass(frozen=True)
class Gamma(MixingDistribution):
    shape: float
    rate: float

    kind = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("gamma shape and rate must be positive")

    def moment(self, s: int) -> float:
        _check_order(s)
        out = 1.0
        for i in range(s):
            out *= (self.shape + i) / self.rate
        return out

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        a, b = self.shape, self.rate
        return (special.gammaln(a + l) - special.gammaln(a)
                + a * math.log(b) - (a + l) * math.log(b + rho))

    def laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        a, b = self.shape, self.rate
        rising = 1.0
        for i in range(l):
            rising *= a + i
        return rising * b ** a / (b + rho) ** (a + l)

    def pdf(self, x):
        return stats.gamma.pdf(x, self.shape, scale=1.0 / self.rate)

    def cdf(self, x):
        return stats.gamma.cdf(x, self.shape, scale=1.0 / self.rate)

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    def continuous_parts(self):
        return [(1.0, self)]

    def to_config(self):
        return {"kind": self.kind, "shape": self.shape, "rate": self.rate}

    def describe(self):
        return f"gamma(shape={self.shape:g}, rate={self.rate:g})"


@dataclass(frozen=True)
class Discrete(MixingDistribution):
    points: tuple[tuple[float, float], ...]

    kind = "discrete"

    def __post_init__(self):
        pairs = tuple((float(v), float(p)) for v, p in self.points)
        if not pairs:
            raise ValueError("discrete mixing needs at least one atom")
        for v, p in pairs:
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"atom value must be nonnegative, got {v}")
            if not p > 0:
                raise ValueError(f"atom probability must be positive, got {p}")
        total = math.fsum(p for _, p in pairs)
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1")
        pairs = tuple((v, p / total) for v, p in pairs)
        object.__setattr__(self, "points", pairs)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.points])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.points])

    def moment(self, s: int) -> float:
        _check_order(s)
        return math.fsum(p * v ** s for v, p in self.points)

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        logs = []
        for v, p in self.points:
            if v == 0.0:
                if l == 0:
                    logs.append(math.log(p))
            else:
                logs.append(math.log(p) + l * math.log(v) - rho * v)
        if not logs:
            return -math.inf
        return float(special.logsumexp(logs))

    def laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        return math.fsum(p * v ** l * math.exp(-rho * v) for v, p in self.points)

    def sample(self, rng, size=None):
        cum = np.cumsum(self.probs)
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
        out = self.values[idx]
        return float(out) if size is None else out

    def atoms(self):
        return list(self.points)

    def to_config(self):
        return {"kind": self.kind, "atoms": [[v, p] for v, p in self.points]}

    def describe(self):
        body = ", ".join(f"({v:g}, {p:g})" for v, p in self.points)
        return f"discrete[{body}]"


@dataclass(frozen=True)
class LogNormal(MixingDistribution):
    """exp(N(location, scale^2)); not determined by its moments."""

    location: float
    scale: float

    kind = "lognormal"
    moment_determinate = False

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("lognormal scale must be positive")

    def moment(self, s: int) -> float:
        _check_order(s)
        return math.exp(s * self.location + 0.5 * s * s * self.scale ** 2)

    def pdf(self, x):
        return stats.lognorm.pdf(x, self.scale, scale=math.exp(self.location))

    def cdf(self, x):
        return stats.lognorm.cdf(x, self.scale, scale=math.exp(self.location))

    def logpdf(self, x):
        return stats.lognorm.logpdf(x, self.scale, scale=math.exp(self.location))

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        mu, sig = self.location, self.scale

        # peak of the integrand in t = log x (concave there); the Laplace
        # approximation sets the quadrature scale
        def neg_log_h(t):
            return -(l * t - rho * math.exp(t) - (t - mu) ** 2 / (2 * sig * sig))

        t0 = mu + l * sig * sig
        res = optimize.minimize_scalar(neg_log_h, bracket=(t0 - 1.0, t0))
        t_star = float(res.x)
        shift = -neg_log_h(t_star) - math.log(sig * math.sqrt(2 * math.pi))
        curvature = rho * math.exp(t_star) + 1.0 / (sig * sig)
        magnitude = math.sqrt(2 * math.pi / curvature)

        def integrand(u):
            x = _u_to_x(u)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                logv = l * np.log(x) - rho * x + self.logpdf(x) - shift
                out = np.exp(logv) * _jacobian(u)
            return np.where(np.isfinite(out), out, 0.0)

        try:
            val = adaptive_gk15(integrand, 0.0, 1.0, atol=QUAD_TOL * magnitude,
                                max_level=QUAD_MAX_LEVEL)
        except NumericalError as exc:
            raise NumericalError(
                f"lognormal Laplace moment l={l}, rho={rho}", exc.achieved
            ) from None
        if val <= 0:
            return -math.inf
        return math.log(val) + shift

    def sample(self, rng, size=None):
        return rng.lognormal(self.location, self.scale, size)

    def continuous_parts(self):
        return [(1.0, self)]

    def to_config(self):
        return {"kind": self.kind, "location": self.location, "scale": self.scale}

    def describe(self):
        return f"lognormal(location={self.location:g}, scale={self.scale:g})"


@dataclass(frozen=True)
class ZeroInflated(MixingDistribution):
    """Atom of mass ``p`` at zero, otherwise a draw from ``base``."""

    p: float
    base: MixingDistribution

    kind = "zero_inflated"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("zero-inflation probability must lie in (0, 1)")
        if self.base.prob_zero > 0:
            raise ValueError("zero-inflated base must have no atom at zero")

    @property
    def moment_determinate(self) -> bool:  # type: ignore[override]
        return self.base.moment_determinate

    def moment(self, s: int) -> float:
        _check_order(s)
        if s == 0:
            return 1.0
        return (1.0 - self.p) * self.base.moment(s)

    def log_laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        tail = math.log1p(-self.p) + self.base.log_laplace_weighted_moment(l, rho)
        if l == 0:
            return float(np.logaddexp(math.log(self.p), tail))
        return tail

    def laplace_weighted_moment(self, l: int, rho: float) -> float:
        _check_order(l)
        head = self.p if l == 0 else 0.0
        return head + (1.0 - self.p) * self.base.laplace_weighted_moment(l, rho)

    def sample(self, rng, size=None):
        u = rng.random(size)
        x = self.base.sample(rng, size)
        if size is None:
            return 0.0 if u < self.p else float(x)
        return np.where(u < self.p, 0.0, x)

    def atoms(self):
        return [(0.0, self.p)] + [(v, (1.0 - self.p) * w) for v, w in self.base.atoms()]

    def continuous_parts(self):
        return [((1.0 - self.p) * w, d) for w, d in self.base.continuous_parts()]

    def to_config(self):
        return {"kind": self.kind, "p": self.p, "base": self.base.to_config()}

    def describe(self):
        return f"zero_inflated(p={self.p:g}, {self.base.describe()})"


def moment(d: MixingDistribution, s: int) -> float:
    return d.moment(s)


def sample(d: MixingDistribution, rng: np.random.Generator) -> float:
    return d.sample(rng)


def laplace_weighted_moment(d: MixingDistribution, l: int, rho: float) -> float:
    return d.laplace_weighted_moment(l, rho)


_FIELDS = {
    "degenerate": {"value"},
    "gamma": {"shape", "rate"},
    "discrete": {"atoms"},
    "zero_inflated": {"p", "base"},
    "lognormal": {"location", "scale"},
}


def _number(record, key, path):
    val = record[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
    return float(val)


def mixing_from_config(record: Any, path: str = "mixing") -> MixingDistribution:
    """Build a mixing distribution from ``{"kind": ..., <parameters>}``.

    Unknown or missing fields raise :class:`ConfigError` naming the field.
    """
    if not isinstance(record, dict):
        raise ConfigError(path, "expected an object")
    kind = record.get("kind")
    if kind not in _FIELDS:
        raise ConfigError(f"{path}.kind", f"unknown mixing kind {kind!r}")
    allowed = _FIELDS[kind]
    for key in record:
        if key != "kind" and key not in allowed:
            raise ConfigError(f"{path}.{key}", f"unknown field for {kind} mixing")
    for key in sorted(allowed):
        if key not in record:
            raise ConfigError(f"{path}.{key}", "missing field")
    try:
        if kind == "degenerate":
            return Degenerate(_number(record, "value", path))
        if kind == "gamma":
            return Gamma(_number(record, "shape", path), _number(record, "rate", path))
        if kind == "lognormal":
            return LogNormal(_number(record, "location", path),
                             _number(record, "scale", path))
        if kind == "zero_inflated":
            base = mixing_from_config(record["base"], f"{path}.base")
            return ZeroInflated(_number(record, "p", path), base)
        atoms = record["atoms"]
        if not isinstance(atoms, list) or not all(
            isinstance(a, list) and len(a) == 2 for a in atoms
        ):
            raise ConfigError(f"{path}.atoms", "expected a list of [value, prob] pairs")
        return Discrete(tuple((float(v), float(p)) for v, p in atoms))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None
