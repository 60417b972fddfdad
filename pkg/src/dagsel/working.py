"""Laplace-error working model: likelihood, LAD fits, risk and Laplace-approximate evidence."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Dag, _bits
from .lad import lad
from .scm import Dataset, ScmSpec, sample_dataset

LOG2 = math.log(2.0)
THETA_FLOOR = 1e-12


def _as_matrix(data) -> np.ndarray:
    return data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)


def log_likelihood(data, g: Dag, b: Sequence, theta: Sequence[float]) -> float:
    """Laplace working-model log-likelihood.

    ``b[j]`` holds node ``j``'s coefficients in increasing parent order.
    """
    X = _as_matrix(data)
    n = X.shape[0]
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (g.p,) or np.any(theta <= 0):
        raise ValueError("scales must be positive, one per node")
    total = -n * g.p * LOG2 - n * float(np.log(theta).sum())
    for j in range(g.p):
        pa = g.parent_list(j)
        coef = np.asarray(b[j], dtype=float)
        if coef.shape != (len(pa),):
            raise ValueError(f"node {j} needs {len(pa)} coefficients, got {coef.shape}")
        r = X[:, j] - X[:, pa] @ coef if pa else X[:, j]
        total -= float(np.abs(r).sum()) / theta[j]
    return total


@dataclass(frozen=True)
class NodeFit:
    node: int
    mask: int
    coef: np.ndarray
    abs_sum: float
    theta: float
    n: int
    rank_deficient: bool = False
    theta_floored: bool = False

    @property
    def parents(self) -> list[int]:
        return _bits(self.mask)

    @property
    def max_loglik(self) -> float:
        return -self.n * (1.0 + LOG2) - self.n * math.log(self.theta)


def fit_node(X: np.ndarray, j: int, mask: int) -> NodeFit:
    pa = _bits(mask)
    n = X.shape[0]
    if n < len(pa) + 1:
        raise ValueError(f"node {j}: need n >= {len(pa) + 1}, got {n}")
    res = lad(X[:, pa], X[:, j])
    theta = res.objective / n
    floored = theta < THETA_FLOOR
    if floored:
        warnings.warn(f"node {j}: fit interpolates the data; scale floored at {THETA_FLOOR}", stacklevel=2)
        theta = THETA_FLOOR
    return NodeFit(j, mask, res.coef, res.objective, theta, n, res.rank_deficient, floored)


class FitCache:
    """Per-dataset cache of node fits keyed by (node, parent mask)."""

    def __init__(self, data):
        self.X = _as_matrix(data)
        self._fits: dict[tuple[int, int], NodeFit] = {}

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def node(self, j: int, mask: int) -> NodeFit:
        key = (j, mask)
        if key not in self._fits:
            self._fits[key] = fit_node(self.X, j, mask)
        return self._fits[key]

    def fit(self, g: Dag) -> WorkingFit:
        return WorkingFit(g, tuple(self.node(j, g.parents[j]) for j in range(g.p)))


@dataclass(frozen=True)
class WorkingFit:
    dag: Dag
    nodes: tuple[NodeFit, ...]

    @property
    def n(self) -> int:
        return self.nodes[0].n

    @property
    def b_hat(self) -> tuple[np.ndarray, ...]:
        return tuple(nf.coef for nf in self.nodes)

    @property
    def theta_hat(self) -> np.ndarray:
        return np.array([nf.theta for nf in self.nodes])

    @property
    def max_loglik(self) -> float:
        return sum(nf.max_loglik for nf in self.nodes)

    @property
    def flagged(self) -> bool:
        return any(nf.rank_deficient or nf.theta_floored for nf in self.nodes)

    def coefficient_map(self) -> dict[tuple[int, int], float]:
        return {(k, nf.node): float(c) for nf in self.nodes for k, c in zip(nf.parents, nf.coef)}


def fit_lad(data, g: Dag, cache: FitCache | None = None) -> WorkingFit:
    """Maximum-likelihood fit of the working model for DAG ``g``."""
    if cache is None:
        cache = FitCache(data)
    X = cache.X
    if X.shape[1] != g.p:
        raise ValueError(f"data has {X.shape[1]} columns, DAG has {g.p} nodes")
    return cache.fit(g)


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    std_error: float
    n_mc: int
    influence: np.ndarray | None = field(default=None, repr=False, compare=False)


def empirical_risk(data, g: Dag, cache: FitCache | None = None) -> RiskEstimate:
    """-(1/n) max log-likelihood with a delta-method standard error.

    Per-observation influence is ``sum_j |r_ij| / theta_j``; its sample standard
    deviation over sqrt(n) is the standard error, and influence vectors from
    the same sample give standard errors for risk differences.
    """
    if cache is None:
        cache = FitCache(data)
    fit = fit_lad(data, g, cache)
    X = cache.X
    n = X.shape[0]
    infl = np.zeros(n)
    for nf in fit.nodes:
        pa = nf.parents
        r = X[:, nf.node] - X[:, pa] @ nf.coef if pa else X[:, nf.node]
        infl += np.abs(r) / nf.theta
    value = -fit.max_loglik / n
    se = float(np.std(infl, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return RiskEstimate(value, se, n, infl)


def risk_difference_se(a: RiskEstimate, b: RiskEstimate) -> float:
    """Standard error of ``a.value - b.value`` for estimates on the same sample."""
    if a.influence is None or b.influence is None or a.n_mc != b.n_mc:
        return math.hypot(a.std_error, b.std_error)
    return float(np.std(a.influence - b.influence, ddof=1) / math.sqrt(a.n_mc))


def population_risk(spec: ScmSpec, g: Dag, n_mc: int = 10**6, seed=0) -> RiskEstimate:
    """Monte Carlo estimate of the minimised working-model risk of ``g``."""
    if n_mc < 10**4:
        raise ValueError("n_mc must be at least 1e4")
    return empirical_risk(sample_dataset(spec, n_mc, seed), g)


def _node_laplace_constant(X: np.ndarray, nf: NodeFit, prior, cross_term: bool) -> float:
    """log prior at the MLE + (d/2) log 2pi - (1/2) log det J for one node."""
    from .bayes import log_prior_b, log_prior_theta  # local import: bayes depends on this module

    pa = nf.parents
    n, d = X.shape[0], len(pa) + 1
    th = nf.theta
    D = X[:, pa]
    J = np.zeros((d, d))
    J[:-1, :-1] = D.T @ D / (n * th * th)
    J[-1, -1] = 1.0 / (th * th)
    if cross_term and pa:
        r = X[:, nf.node] - D @ nf.coef
        c = (np.sign(r) @ D) / (n * th * th)
        J[:-1, -1] = J[-1, :-1] = c
    sign, logdet = np.linalg.slogdet(J)
    if sign <= 0:
        raise ValueError(f"node {nf.node}: curvature matrix is not positive definite")
    lp = log_prior_theta(th, prior) + log_prior_b(nf.coef, D, prior)
    return lp + 0.5 * d * math.log(2 * math.pi) - 0.5 * logdet


def laplace_log_marginal(
    data,
    g: Dag,
    include_constant: bool = False,
    prior=None,
    cache: FitCache | None = None,
    cross_term: bool = False,
) -> float:
    """max log-lik - ((p + |g|)/2) log n, optionally plus the Gaussian-integral constant."""
    if cache is None:
        cache = FitCache(data)
    n = cache.n
    if n < 2:
        raise ValueError("need n >= 2")
    fit = fit_lad(data, g, cache)
    if fit.flagged:
        raise ValueError("degenerate fit: rank-deficient design or interpolating residuals")
    value = fit.max_loglik - 0.5 * (g.p + g.n_edges) * math.log(n)
    if include_constant:
        if prior is None:
            from .bayes import PriorSpec

            prior = PriorSpec()
        value += sum(_node_laplace_constant(cache.X, nf, prior, cross_term) for nf in fit.nodes)
    return value
