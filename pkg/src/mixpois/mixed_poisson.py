"""Mixed Poisson laws MPo(rho X) and their multivariate extension.

Y ~ MPo(rho X) means: draw X from the mixing law, then Y | X=x is
Poisson(rho x).  The pmf is rho^l / l! * E(X^l exp(-rho X)); factorial
moments are rho^s E(X^s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Any, Sequence

import numpy as np
from scipy import special

from .combinatorics import assoc_stirling2, stirling2
from .kernels import poisson_sample
from .mixing import ConfigError, Discrete, Degenerate, MixingDistribution, mixing_from_config

__all__ = [
    "CoupledSample",
    "CoupledBatch",
    "MixedPoissonModel",
    "IndependentMixing",
    "ComonotoneMixing",
    "JointTableMixing",
    "MultiMixedPoissonModel",
    "pmf",
    "sample_coupled",
    "sample_coupled_vector",
    "factorial_moment",
    "raw_moment",
    "centered_moment",
    "model_from_config",
]


@dataclass(frozen=True)
class CoupledSample:
    """One draw (x, y) with y | x ~ Poisson(rho x)."""

    x: float
    y: int


@dataclass(frozen=True)
class CoupledBatch:
    """Arrays of coupled draws; ``x[i]`` generated ``y[i]``."""

    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)

    def __getitem__(self, i) -> CoupledSample:
        return CoupledSample(float(self.x[i]), int(self.y[i]))


@dataclass(frozen=True)
class MixedPoissonModel:
    mixing: MixingDistribution
    rho: float

    def __post_init__(self):
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be finite and nonnegative, got {self.rho}")

    def log_pmf(self, l: int) -> float:
        if l < 0:
            return -math.inf
        if self.rho == 0.0:
            return 0.0 if l == 0 else -math.inf
        return (l * math.log(self.rho) - special.gammaln(l + 1)
                + self.mixing.log_laplace_weighted_moment(l, self.rho))

    def pmf(self, l: int) -> float:
        return math.exp(self.log_pmf(l))

    def pmf_table(self, max_l: int) -> np.ndarray:
        return np.array([self.pmf(l) for l in range(max_l + 1)])

    def sample_coupled(self, rng: np.random.Generator, size: int | None = None):
        """A :class:`CoupledSample`, or a :class:`CoupledBatch` of ``size``."""
        if size is None:
            batch = self.sample_coupled(rng, 1)
            return batch[0]
        x = np.asarray(self.mixing.sample(rng, size), dtype=float)
        y = poisson_sample(self.rho * x, rng)
        return CoupledBatch(x, y)

    def factorial_moment(self, s: int) -> float:
        if s < 1:
            raise ValueError("factorial moment order must be >= 1")
        return self.rho ** s * self.mixing.moment(s)

    def raw_moment(self, s: int) -> float:
        return math.fsum(stirling2(s, j) * self.rho ** j * self.mixing.moment(j)
                         for j in range(s + 1))

    def centered_moment(self, s: int) -> float:
        """E((Y - rho X)^s) = sum_k rho^k mu_k S2(s, k)."""
        return math.fsum(assoc_stirling2(s, k) * self.rho ** k * self.mixing.moment(k)
                         for k in range(s + 1))

    def cross_moment(self, a: int, b: int) -> float:
        """E(X^a Y^b), by conditioning: E(X^a T_b(rho X))."""
        return math.fsum(stirling2(b, j) * self.rho ** j * self.mixing.moment(a + j)
                         for j in range(b + 1))

    def to_config(self) -> dict[str, Any]:
        return {"mixing": self.mixing.to_config(), "rho": self.rho}

    def describe(self) -> str:
        return f"MPo({self.rho:g} * {self.mixing.describe()})"


def pmf(model: MixedPoissonModel, l: int) -> float:
    return model.pmf(l)


def sample_coupled(model: MixedPoissonModel, rng: np.random.Generator) -> CoupledSample:
    return model.sample_coupled(rng)


def factorial_moment(model: MixedPoissonModel, s: int) -> float:
    return model.factorial_moment(s)


def raw_moment(model: MixedPoissonModel, s: int) -> float:
    return model.raw_moment(s)


def centered_moment(model: MixedPoissonModel, s: int) -> float:
    return model.centered_moment(s)


# -- multivariate ----------------------------------------------------------

@dataclass(frozen=True)
class IndependentMixing:
    components: tuple[MixingDistribution, ...]

    kind = "independent"

    @property
    def dim(self) -> int:
        return len(self.components)

    def sample(self, rng, size: int) -> np.ndarray:
        return np.column_stack([np.asarray(c.sample(rng, size), dtype=float)
                                for c in self.components])

    def marginal(self, j: int) -> MixingDistribution:
        return self.components[j]

    def to_config(self):
        return {"kind": self.kind, "components": [c.to_config() for c in self.components]}


@dataclass(frozen=True)
class ComonotoneMixing:
    """The same mixing value X copied into every coordinate."""

    mixing: MixingDistribution
    dim: int

    kind = "comonotone"

    def sample(self, rng, size: int) -> np.ndarray:
        x = np.asarray(self.mixing.sample(rng, size), dtype=float)
        return np.repeat(x[:, None], self.dim, axis=1)

    def marginal(self, j: int) -> MixingDistribution:
        return self.mixing

    def to_config(self):
        return {"kind": self.kind, "mixing": self.mixing.to_config(), "dim": self.dim}


@dataclass(frozen=True)
class JointTableMixing:
    """Finitely many mixing vectors with probabilities."""

    atoms: tuple[tuple[tuple[float, ...], float], ...]

    kind = "table"

    def __post_init__(self):
        atoms = tuple((tuple(float(v) for v in vec), float(p)) for vec, p in self.atoms)
        if not atoms:
            raise ValueError("joint table needs at least one atom")
        dims = {len(vec) for vec, _ in atoms}
        if len(dims) != 1:
            raise ValueError("joint table vectors have inconsistent dimensions")
        if any(v < 0 for vec, _ in atoms for v in vec) or any(p <= 0 for _, p in atoms):
            raise ValueError("joint table needs nonnegative values and positive probabilities")
        total = math.fsum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"joint table probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", tuple((vec, p / total) for vec, p in atoms))

    @property
    def dim(self) -> int:
        return len(self.atoms[0][0])

    def sample(self, rng, size: int) -> np.ndarray:
        cum = np.cumsum([p for _, p in self.atoms])
        idx = np.minimum(np.searchsorted(cum, rng.random(size), side="right"),
                         len(cum) - 1)
        table = np.array([vec for vec, _ in self.atoms])
        return table[idx]

    def marginal(self, j: int) -> MixingDistribution:
        merged: dict[float, float] = {}
        for vec, p in self.atoms:
            merged[vec[j]] = merged.get(vec[j], 0.0) + p
        return Discrete(tuple(sorted(merged.items())))

    def to_config(self):
        return {"kind": self.kind, "atoms": [[list(vec), p] for vec, p in self.atoms]}


@dataclass(frozen=True)
class MultiMixedPoissonModel:
    joint_mixing: IndependentMixing | ComonotoneMixing | JointTableMixing
    rhos: tuple[float, ...] = field(default=())

    def __post_init__(self):
        rhos = tuple(float(r) for r in self.rhos)
        object.__setattr__(self, "rhos", rhos)
        if len(rhos) < 2:
            raise ValueError("multivariate model needs dimension >= 2")
        if len(rhos) != self.joint_mixing.dim:
            raise ValueError(
                f"{len(rhos)} scale parameters for a {self.joint_mixing.dim}-dimensional mixing"
            )
        if any(not (r > 0 and math.isfinite(r)) for r in rhos):
            raise ValueError("multivariate scale parameters must be positive")

    @property
    def dim(self) -> int:
        return len(self.rhos)

    def marginal(self, j: int) -> MixedPoissonModel:
        return MixedPoissonModel(self.joint_mixing.marginal(j), self.rhos[j])

    def sample_coupled_vector(self, rng: np.random.Generator, size: int | None = None):
        """Draw the mixing vector jointly, then independent Poissons given it.

        Without ``size`` returns a list of :class:`CoupledSample`, one per
        coordinate; with ``size`` returns arrays ``(X, Y)`` of shape
        ``(size, m)``.
        """
        n = 1 if size is None else size
        X = self.joint_mixing.sample(rng, n)
        lam = X * np.asarray(self.rhos)[None, :]
        Y = poisson_sample(lam.ravel(), rng).reshape(lam.shape)
        if size is None:
            return [CoupledSample(float(X[0, j]), int(Y[0, j])) for j in range(self.dim)]
        return X, Y

    def pmf(self, ls: Sequence[int]) -> float:
        """Joint pmf; available for tables, independent and degenerate comonotone mixing."""
        ls = tuple(int(l) for l in ls)
        if len(ls) != self.dim:
            raise ValueError("pmf argument has the wrong dimension")
        if any(l < 0 for l in ls):
            return 0.0
        jm = self.joint_mixing
        if isinstance(jm, IndependentMixing):
            return math.prod(self.marginal(j).pmf(l) for j, l in enumerate(ls))
        if isinstance(jm, ComonotoneMixing):
            if not isinstance(jm.mixing, Degenerate):
                raise NotImplementedError(
                    "joint pmf of comonotone mixing is only available for degenerate mixing"
                )
            c = jm.mixing.value
            return math.prod(MixedPoissonModel(Degenerate(c), r).pmf(l)
                             for r, l in zip(self.rhos, ls))
        total = 0.0
        for vec, p in jm.atoms:
            term = p
            for x, r, l in zip(vec, self.rhos, ls):
                term *= MixedPoissonModel(Degenerate(x), r).pmf(l)
            total += term
        return total

    def to_config(self) -> dict[str, Any]:
        return {"joint_mixing": self.joint_mixing.to_config(), "rhos": list(self.rhos)}

    def describe(self) -> str:
        jm = self.joint_mixing
        if isinstance(jm, ComonotoneMixing):
            inner = f"comonotone {jm.mixing.describe()}"
        elif isinstance(jm, IndependentMixing):
            inner = "independent " + ", ".join(c.describe() for c in jm.components)
        else:
            inner = f"table with {len(jm.atoms)} atoms"
        rhos = ", ".join(f"{r:g}" for r in self.rhos)
        return f"MPo(rho=({rhos}); {inner})"


def sample_coupled_vector(model: MultiMixedPoissonModel,
                          rng: np.random.Generator) -> list[CoupledSample]:
    return model.sample_coupled_vector(rng)


def _joint_from_config(record, path):
    if not isinstance(record, dict):
        raise ConfigError(path, "expected an object")
    kind = record.get("kind")
    allowed = {"independent": {"components"}, "comonotone": {"mixing", "dim"},
               "table": {"atoms"}}
    if kind not in allowed:
        raise ConfigError(f"{path}.kind", f"unknown joint mixing kind {kind!r}")
    for key in record:
        if key != "kind" and key not in allowed[kind]:
            raise ConfigError(f"{path}.{key}", f"unknown field for {kind} joint mixing")
    for key in sorted(allowed[kind]):
        if key not in record:
            raise ConfigError(f"{path}.{key}", "missing field")
    if kind == "independent":
        comps = record["components"]
        if not isinstance(comps, list):
            raise ConfigError(f"{path}.components", "expected a list")
        return IndependentMixing(tuple(mixing_from_config(c, f"{path}.components[{i}]")
                                       for i, c in enumerate(comps)))
    if kind == "comonotone":
        dim = record["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int):
            raise ConfigError(f"{path}.dim", "expected an integer")
        return ComonotoneMixing(mixing_from_config(record["mixing"], f"{path}.mixing"), dim)
    try:
        return JointTableMixing(tuple((tuple(vec), p) for vec, p in record["atoms"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.atoms", str(exc)) from None


def model_from_config(record: Any, path: str = "model"):
    """Parse ``{"mixing": ..., "rho": r}`` or ``{"joint_mixing": ..., "rhos": [...]}``.

    ``rho`` may be omitted when the caller supplies a schedule instead; the
    model is then returned with rho = 1.
    """
    if not isinstance(record, dict):
        raise ConfigError(path, "expected an object")
    if "joint_mixing" in record:
        for key in record:
            if key not in ("joint_mixing", "rhos"):
                raise ConfigError(f"{path}.{key}", "unknown field for multivariate model")
        if "rhos" not in record:
            raise ConfigError(f"{path}.rhos", "missing field")
        joint = _joint_from_config(record["joint_mixing"], f"{path}.joint_mixing")
        rhos = record["rhos"]
        if not isinstance(rhos, list) or not all(
            isinstance(r, (int, float)) and not isinstance(r, bool) for r in rhos
        ):
            raise ConfigError(f"{path}.rhos", "expected a list of numbers")
        try:
            return MultiMixedPoissonModel(joint, tuple(rhos))
        except ValueError as exc:
            raise ConfigError(f"{path}.rhos", str(exc)) from None
    for key in record:
        if key not in ("mixing", "rho"):
            raise ConfigError(f"{path}.{key}", "unknown field for model")
    if "mixing" not in record:
        raise ConfigError(f"{path}.mixing", "missing field")
    mixing = mixing_from_config(record["mixing"], f"{path}.mixing")
    rho = record.get("rho", 1.0)
    if isinstance(rho, bool) or not isinstance(rho, (int, float)):
        raise ConfigError(f"{path}.rho", f"expected a number, got {rho!r}")
    try:
        return MixedPoissonModel(mixing, float(rho))
    except ValueError as exc:
        raise ConfigError(f"{path}.rho", str(exc)) from None
