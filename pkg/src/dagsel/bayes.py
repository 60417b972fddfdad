"""Priors, importance-sampled evidence, DAG priors and posteriors over all DAGs."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .graph import Dag, _bits
from .working import LOG2, FitCache, NodeFit

PROPOSAL_DF = 5.0
MAX_ATTEMPTS = 3
CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class PriorSpec:
    """Coefficient prior (``ridge`` with variance ``tau2`` or Zellner ``gprior`` with ``g``)
    and inverse-gamma(shape, rate) scale prior."""

    coeff_prior: str = "ridge"
    tau2: float = 100.0
    g: float = 100.0
    shape: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.coeff_prior not in ("ridge", "gprior"):
            raise ValueError(f"unknown coefficient prior {self.coeff_prior!r}")
        if min(self.tau2, self.g, self.shape, self.rate) <= 0:
            raise ValueError("prior hyperparameters must be positive")


def _coef_prior_cov(D: np.ndarray, prior: PriorSpec) -> np.ndarray:
    d = D.shape[1]
    if prior.coeff_prior == "ridge":
        return prior.tau2 * np.eye(d)
    return prior.g * np.linalg.inv(_gram(D)[0])


def _mvn_logpdf(B: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Zero-mean Gaussian log density at the rows of ``B``."""
    d = cov.shape[0]
    L = np.linalg.cholesky(cov)
    z = np.linalg.solve(L, B.T)
    return -0.5 * (z * z).sum(axis=0) - np.log(np.diag(L)).sum() - 0.5 * d * math.log(2 * math.pi)


def log_prior_b(b: np.ndarray, D: np.ndarray, prior: PriorSpec) -> float:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.size == 0:
        return 0.0
    return float(_mvn_logpdf(b[None, :], _coef_prior_cov(D, prior))[0])


def log_prior_theta(theta, prior: PriorSpec):
    a, r = prior.shape, prior.rate
    theta = np.asarray(theta, dtype=float)
    out = a * math.log(r) - gammaln(a) - (a + 1) * np.log(theta) - r / theta
    return float(out) if out.ndim == 0 else out


def _gram(D: np.ndarray) -> tuple[np.ndarray, bool]:
    G = D.T @ D
    d = G.shape[0]
    jittered = False
    if d and np.linalg.cond(G) > 1e12:
        G = G + 1e-8 * np.trace(G) / d * np.eye(d)
        jittered = True
    return G, jittered


@dataclass(frozen=True)
class ProposalParams:
    """Multivariate-t(5) proposal for coefficients and lognormal proposal for the scale."""

    loc: np.ndarray
    scale: np.ndarray
    log_theta_mean: float
    log_theta_var: float
    df: float = PROPOSAL_DF
    jittered: bool = False

    @classmethod
    def from_fit(cls, D: np.ndarray, nf: NodeFit, inflate: float = 1.0) -> ProposalParams:
        n = D.shape[0]
        c_n = math.log1p(1.0 / n)
        d = D.shape[1]
        jittered = False
        if d:
            G, jittered = _gram(D)
            scale = (PROPOSAL_DF - 2) / PROPOSAL_DF * (nf.theta / 2.0) * np.linalg.inv(G)
            scale = 0.5 * (scale + scale.T) * inflate
        else:
            scale = np.zeros((0, 0))
        return cls(
            loc=np.asarray(nf.coef, dtype=float),
            scale=scale,
            log_theta_mean=math.log(nf.theta) - c_n / 2,
            log_theta_var=c_n * inflate,
            jittered=jittered,
        )

    def sample(self, rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
        d = self.loc.size
        theta = np.exp(self.log_theta_mean + math.sqrt(self.log_theta_var) * rng.standard_normal(m))
        if d == 0:
            return np.zeros((m, 0)), theta
        L = np.linalg.cholesky(self.scale)
        z = rng.standard_normal((m, d))
        w = rng.chisquare(self.df, m)
        B = self.loc + (z @ L.T) / np.sqrt(w / self.df)[:, None]
        return B, theta

    def logpdf(self, B: np.ndarray, theta: np.ndarray) -> np.ndarray:
        lt = np.log(theta)
        v = self.log_theta_var
        out = -lt - 0.5 * math.log(2 * math.pi * v) - (lt - self.log_theta_mean) ** 2 / (2 * v)
        d = self.loc.size
        if d:
            nu = self.df
            L = np.linalg.cholesky(self.scale)
            z = np.linalg.solve(L, (B - self.loc).T)
            q = (z * z).sum(axis=0)
            out = out + (
                gammaln((nu + d) / 2)
                - gammaln(nu / 2)
                - 0.5 * d * math.log(nu * math.pi)
                - np.log(np.diag(L)).sum()
                - 0.5 * (nu + d) * np.log1p(q / nu)
            )
        return out


@dataclass(frozen=True)
class MarginalEstimate:
    log_m: float
    mc_std_error: float
    m_samples: int
    flagged: bool = False

    def __post_init__(self):
        if self.m_samples < 1:
            raise ValueError("m_samples must be >= 1")
        if not math.isfinite(self.log_m):
            raise ValueError("log marginal is not finite")


def _abs_residual_sums(D: np.ndarray, y: np.ndarray, B: np.ndarray) -> np.ndarray:
    m, d = B.shape
    if d == 0:
        return np.full(m, float(np.abs(y).sum()))
    out = np.empty(m)
    step = max(1, CHUNK_ELEMENTS // max(len(y), 1))
    for s in range(0, m, step):
        R = y[:, None] - D @ B[s : s + step].T
        out[s : s + step] = np.abs(R).sum(axis=0)
    return out


def node_seed(seed, node: int, mask: int) -> np.random.SeedSequence:
    key = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.SeedSequence(key + [node, mask])


def node_log_marginal(
    X: np.ndarray, nf: NodeFit, prior: PriorSpec, m_samples: int, seed
) -> MarginalEstimate:
    """Importance-sampling estimate of one node's evidence factor."""
    if m_samples < 100:
        raise ValueError("m_samples must be at least 100")
    pa = nf.parents
    D, y = X[:, pa], X[:, nf.node]
    n = X.shape[0]
    rng = np.random.default_rng(node_seed(seed, nf.node, nf.mask))
    cov = _coef_prior_cov(D, prior) if pa else None
    for attempt in range(MAX_ATTEMPTS):
        prop = ProposalParams.from_fit(D, nf, inflate=2.0**attempt)
        B, theta = prop.sample(rng, m_samples)
        S = _abs_residual_sums(D, y, B)
        lw = -n * LOG2 - n * np.log(theta) - S / theta
        lw += log_prior_theta(theta, prior) - prop.logpdf(B, theta)
        if pa:
            lw += _mvn_logpdf(B, cov)
        if np.all(np.isfinite(lw)):
            log_m = float(logsumexp(lw) - math.log(m_samples))
            w = np.exp(lw - lw.max())
            se = float(np.std(w, ddof=1) / (math.sqrt(m_samples) * w.mean()))
            return MarginalEstimate(log_m, se, m_samples, flagged=prop.jittered or attempt > 0)
        warnings.warn(f"node {nf.node}: non-finite importance weights, widening proposal", stacklevel=2)
    raise FloatingPointError(f"node {nf.node}: importance weights non-finite after {MAX_ATTEMPTS} attempts")


class EvidenceEngine:
    """Evidence for many DAGs on one dataset, sharing node-level fits and estimates.

    The working model factorises over nodes, so a DAG's log evidence is the sum
    of node factors that depend only on (node, parent set). Each factor is
    estimated once with a stream seeded by (seed, node, parent set).
    """

    def __init__(self, data, prior: PriorSpec | None = None, m_samples: int = 10_000, seed=0):
        self.cache = data if isinstance(data, FitCache) else FitCache(data)
        self.prior = prior or PriorSpec()
        self.m_samples = m_samples
        self.seed = seed
        self._nodes: dict[tuple[int, int], MarginalEstimate] = {}

    @property
    def n(self) -> int:
        return self.cache.n

    def node(self, j: int, mask: int) -> MarginalEstimate:
        key = (j, mask)
        if key not in self._nodes:
            nf = self.cache.node(j, mask)
            self._nodes[key] = node_log_marginal(self.cache.X, nf, self.prior, self.m_samples, self.seed)
        return self._nodes[key]

    def marginal(self, g: Dag) -> MarginalEstimate:
        parts = [self.node(j, g.parents[j]) for j in range(g.p)]
        return MarginalEstimate(
            sum(e.log_m for e in parts),
            math.sqrt(sum(e.mc_std_error**2 for e in parts)),
            self.m_samples,
            flagged=any(e.flagged for e in parts),
        )


def importance_marginal(
    data, g: Dag, prior: PriorSpec | None = None, m_samples: int = 10_000, seed=0
) -> MarginalEstimate:
    return EvidenceEngine(data, prior, m_samples, seed).marginal(g)


@dataclass(frozen=True)
class DagPriorSpec:
    """``uniform`` or ``complexity``: log prior -n**alpha * d_n * |g|.

    For the complexity prior ``d`` fixes d_n; ``d=None`` estimates it from data.
    """

    kind: str = "uniform"
    alpha: float = 0.99
    d: float | None = None
    gap_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "complexity"):
            raise ValueError(f"unknown DAG prior {self.kind!r}")
        if self.kind == "complexity" and not 0.5 < self.alpha < 1.0:
            raise ValueError("complexity prior needs alpha in (1/2, 1)")
        if self.d is not None and self.d <= 0:
            raise ValueError("d must be positive")

    @property
    def data_driven(self) -> bool:
        return self.kind == "complexity" and self.d is None


def compute_dn(data, dags: Iterable[Dag], cache: FitCache | None = None, gap_sigma: float = 0.0) -> float:
    """(1/K) times the smallest positive gap (max-loglik_{g'} - max-loglik_g)/n over DAG pairs.

    With ``gap_sigma > 0`` a gap counts as positive only when it exceeds
    ``gap_sigma`` standard errors of the paired per-observation log-density
    difference, so near-ties between equally good DAGs are ignored.
    """
    if cache is None:
        cache = data if isinstance(data, FitCache) else FitCache(data)
    dags = list(dict.fromkeys(dags))
    if not dags:
        raise ValueError("no DAGs given")
    p = dags[0].p
    K = max(math.comb(p, 2), 1)
    n = cache.n
    fits = [cache.fit(g) for g in dags]
    ll = np.array([f.max_loglik for f in fits]) / n
    if gap_sigma > 0:
        dens = np.array([_pointwise_loglik(cache, f) for f in fits])
    best = math.inf
    for a in range(len(dags)):
        for b in range(len(dags)):
            gap = ll[b] - ll[a]
            if not gap > 0 or gap >= best:
                continue
            if gap_sigma > 0:
                se = np.std(dens[b] - dens[a], ddof=1) / math.sqrt(n)
                if gap <= gap_sigma * se:
                    continue
            best = gap
    if not math.isfinite(best):
        warnings.warn("no strictly positive log-likelihood gap; using d_n = 1/K", stacklevel=2)
        return 1.0 / K
    return best / K


def _pointwise_loglik(cache: FitCache, fit) -> np.ndarray:
    X = cache.X
    out = np.zeros(X.shape[0])
    for nf in fit.nodes:
        pa = nf.parents
        r = X[:, nf.node] - X[:, pa] @ nf.coef if pa else X[:, nf.node]
        out -= LOG2 + math.log(nf.theta) + np.abs(r) / nf.theta
    return out


def dag_log_prior(g: Dag, spec: DagPriorSpec, n: int = 1, d_n: float | None = None) -> float:
    if spec.kind == "uniform":
        return 0.0
    if n < 1:
        raise ValueError("n must be >= 1")
    d = spec.d if d_n is None else d_n
    if d is None or d <= 0:
        raise ValueError("complexity prior needs d_n > 0")
    return -(n**spec.alpha) * d * g.n_edges


@dataclass(frozen=True)
class PosteriorRow:
    dag: Dag
    log_marginal: float
    log_prior: float
    posterior: float


@dataclass(frozen=True)
class PosteriorTable:
    rows: tuple[PosteriorRow, ...]
    d_n: float | None = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("empty posterior table")
        object.__setattr__(self, "_index", {r.dag: r for r in self.rows})

    def row(self, g: Dag) -> PosteriorRow:
        try:
            return self._index[g]
        except KeyError:
            raise KeyError(f"DAG not in table: {g}") from None

    def prob(self, g: Dag) -> float:
        return self.row(g).posterior

    def map_dag(self) -> Dag:
        return self.rows[0].dag

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def posterior_table(
    marginals: Mapping[Dag, MarginalEstimate | float],
    prior: DagPriorSpec | None = None,
    n: int = 1,
    d_n: float | None = None,
) -> PosteriorTable:
    if not marginals:
        raise ValueError("no marginals given")
    prior = prior or DagPriorSpec()
    dags = list(marginals)
    log_m = np.array([getattr(marginals[g], "log_m", marginals[g]) for g in dags], dtype=float)
    log_pr = np.array([dag_log_prior(g, prior, n, d_n) for g in dags])
    s = log_m + log_pr
    post = np.exp(s - logsumexp(s))
    post /= post.sum()
    order = sorted(range(len(dags)), key=lambda i: (-post[i], dags[i].parents))
    rows = tuple(PosteriorRow(dags[i], float(log_m[i]), float(log_pr[i]), float(post[i])) for i in order)
    return PosteriorTable(rows, d_n)


def bayes_factor(table: PosteriorTable, g1: Dag, g2: Dag) -> tuple[float, float]:
    """(log Bayes factor, log posterior odds) of ``g1`` against ``g2``."""
    r1, r2 = table.row(g1), table.row(g2)
    log_bf = r1.log_marginal - r2.log_marginal
    return log_bf, log_bf + r1.log_prior - r2.log_prior


def posterior_share(table: PosteriorTable, g1: Dag, g2: Dag) -> float:
    r1, r2 = table.row(g1), table.row(g2)
    # work on the log scale so shares stay defined when both probabilities underflow
    a = r1.log_marginal + r1.log_prior
    b = r2.log_marginal + r2.log_prior
    if not (math.isfinite(a) or math.isfinite(b)):
        raise ZeroDivisionError("both DAGs have zero posterior")
    return float(1.0 / (1.0 + math.exp(min(b - a, 700.0))))


def class_posterior(table: PosteriorTable, dags: Iterable[Dag]) -> float:
    return float(min(1.0, sum(table.prob(g) for g in set(dags))))


def dag_posterior(
    data,
    dags: Sequence[Dag],
    prior: PriorSpec | None = None,
    dag_prior: DagPriorSpec | None = None,
    m_samples: int = 10_000,
    seed=0,
) -> PosteriorTable:
    """Full pipeline: evidence for every DAG, optional data-driven d_n, normalised posterior."""
    engine = EvidenceEngine(data, prior, m_samples, seed)
    dag_prior = dag_prior or DagPriorSpec()
    d_n = None
    if dag_prior.data_driven:
        d_n = compute_dn(engine.cache, dags, gap_sigma=dag_prior.gap_sigma)
    elif dag_prior.kind == "complexity":
        d_n = dag_prior.d
    marginals = {g: engine.marginal(g) for g in dags}
    return posterior_table(marginals, dag_prior, engine.n, d_n)
