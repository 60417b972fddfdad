"""Linear recursive SEMs with Gaussian scale-mixture errors."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import gammaln

from .graph import Dag, topological_order, total_effects

HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)


class MixingLaw:
    """Law of the scale ``lam`` in ``eps = lam * z``, ``z ~ N(0, 1)``."""

    name: str = ""

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    @property
    def is_degenerate(self) -> bool:
        return False

    @property
    def finite_second_moment(self) -> bool:
        return math.isfinite(self.second_moment())

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(MixingLaw):
    """Gaussian error with standard deviation ``sigma``."""

    sigma: float
    name = "point_mass"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def from_variance(cls, var: float) -> PointMass:
        return cls(math.sqrt(var))

    def sample(self, rng, size):
        return np.full(size, self.sigma)

    def mean(self):
        return self.sigma

    def second_moment(self):
        return self.sigma**2

    @property
    def is_degenerate(self):
        return True

    def params(self):
        return {"sigma": self.sigma}


@dataclass(frozen=True)
class ExpOnSquare(MixingLaw):
    """``lam**2`` exponential with the given mean; mean 2 gives Laplace(0, 1) errors."""

    mean_square: float
    name = "exp_on_square"

    def __post_init__(self):
        if not self.mean_square > 0:
            raise ValueError("mean must be positive")

    def sample(self, rng, size):
        return np.sqrt(rng.exponential(self.mean_square, size))

    def mean(self):
        return math.sqrt(self.mean_square) * math.sqrt(math.pi) / 2.0

    def second_moment(self):
        return self.mean_square

    def params(self):
        return {"mean": self.mean_square}


@dataclass(frozen=True)
class InvGammaOnSquare(MixingLaw):
    """``lam**2`` inverse-gamma(shape, scale); (nu/2, nu/2) gives Student t_nu errors."""

    shape: float
    scale: float
    name = "inv_gamma_on_square"

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")
        if self.shape <= 1:
            warnings.warn(
                f"inverse-gamma shape {self.shape} <= 1: mixing scale has infinite second moment",
                stacklevel=3,
            )

    def sample(self, rng, size):
        return np.sqrt(self.scale / rng.gamma(self.shape, 1.0, size))

    def mean(self):
        if self.shape <= 0.5:
            raise ValueError("E[lambda] undefined for inverse-gamma shape <= 1/2")
        return math.sqrt(self.scale) * math.exp(gammaln(self.shape - 0.5) - gammaln(self.shape))

    def second_moment(self):
        return self.scale / (self.shape - 1) if self.shape > 1 else math.inf

    def params(self):
        return {"shape": self.shape, "scale": self.scale}


@dataclass(frozen=True)
class UniformOnLambda(MixingLaw):
    lo: float
    hi: float
    name = "uniform_on_lambda"

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError("need 0 < lo < hi")

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def second_moment(self):
        return (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0

    def params(self):
        return {"lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class DiscreteOnSquare(MixingLaw):
    """``lam**2`` takes ``values[i]`` with probability ``probs[i]``."""

    values: tuple[float, ...]
    probs: tuple[float, ...]
    name = "discrete_on_square"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(q) for q in self.probs))
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("values and probs must be non-empty and aligned")
        if any(v <= 0 for v in self.values) or any(q < 0 for q in self.probs):
            raise ValueError("values must be positive and probs non-negative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("probs must sum to 1")

    def sample(self, rng, size):
        idx = rng.choice(len(self.values), size=size, p=np.asarray(self.probs))
        return np.sqrt(np.asarray(self.values))[idx]

    def mean(self):
        return sum(q * math.sqrt(v) for v, q in zip(self.values, self.probs))

    def second_moment(self):
        return sum(q * v for v, q in zip(self.values, self.probs))

    @property
    def is_degenerate(self):
        return sum(q > 0 for q in self.probs) == 1

    def params(self):
        return {"values": list(self.values), "probs": list(self.probs)}


LAWS = {cls.name: cls for cls in (PointMass, ExpOnSquare, InvGammaOnSquare, UniformOnLambda, DiscreteOnSquare)}


def law_from_params(name: str, params: Mapping) -> MixingLaw:
    if name not in LAWS:
        raise ValueError(f"unknown mixing law {name!r}; choose from {sorted(LAWS)}")
    if name == "exp_on_square":
        return ExpOnSquare(float(params["mean"]))
    if name == "point_mass" and "variance" in params:
        return PointMass.from_variance(float(params["variance"]))
    if name == "discrete_on_square":
        return DiscreteOnSquare(tuple(params["values"]), tuple(params["probs"]))
    return LAWS[name](**{k: float(v) for k, v in params.items()})


@dataclass(frozen=True)
class ScmSpec:
    """Ground truth SEM: DAG, non-zero edge coefficients and per-node mixing laws."""

    dag: Dag
    coeffs: Mapping[tuple[int, int], float]
    noise: tuple[MixingLaw, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", dict(self.coeffs))
        object.__setattr__(self, "noise", tuple(self.noise))
        if set(self.coeffs) != set(self.dag.edges()):
            raise ValueError("coefficients must be given exactly on the DAG's edges")
        if any(c == 0 for c in self.coeffs.values()):
            raise ValueError("edge coefficients must be non-zero")
        if len(self.noise) != self.dag.p:
            raise ValueError("need one mixing law per node")

    @property
    def p(self) -> int:
        return self.dag.p

    def total_effects(self) -> np.ndarray:
        return total_effects(self.dag, self.coeffs)

    def error_variances(self) -> np.ndarray:
        return np.array([law.second_moment() for law in self.noise])

    def covariance(self) -> np.ndarray:
        T = self.total_effects()
        return T @ np.diag(self.error_variances()) @ T.T


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("dataset must be a non-empty n x p matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def node_rng(seed, node: int) -> np.random.Generator:
    """Independent stream for one node, keyed by the seed (int or tuple of ints)."""
    key = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    return np.random.default_rng(np.random.SeedSequence(list(key) + [node]))


def sample_errors(law: MixingLaw, rng: np.random.Generator, n: int) -> np.ndarray:
    lam = law.sample(rng, n)
    return lam * rng.standard_normal(n)


def sample_dataset(spec: ScmSpec, n: int, seed) -> Dataset:
    if n < 1:
        raise ValueError("n must be >= 1")
    X = np.zeros((n, spec.p))
    for j in topological_order(spec.dag):
        eps = sample_errors(spec.noise[j], node_rng(seed, j), n)
        X[:, j] = eps
        for k in spec.dag.parent_list(j):
            X[:, j] += spec.coeffs[(k, j)] * X[:, k]
    return Dataset(X)


def mean_abs_lambda(law: MixingLaw) -> float:
    """E[lam]; the error's mean absolute value is sqrt(2/pi) times this."""
    return law.mean()


def mean_abs_error(law: MixingLaw) -> float:
    return HALF_NORMAL_MEAN * law.mean()


def analytic_h_star(spec: ScmSpec) -> float:
    """Minimised working-model risk at the true DAG: p(1 + log 2) + sum_j log E|eps_j|."""
    return spec.p * (1.0 + math.log(2.0)) + sum(math.log(mean_abs_error(law)) for law in spec.noise)


def nongaussian_set(spec: ScmSpec) -> frozenset:
    return frozenset(j for j, law in enumerate(spec.noise) if not law.is_degenerate)
