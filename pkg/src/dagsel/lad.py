"""Least absolute deviations regression without an intercept.

The solver runs iteratively reweighted least squares on the smoothed loss
``sqrt(r**2 + eps**2)`` with a shrinking ``eps``, then moves to a vertex of
the LAD polytope (``d`` zero residuals) and walks along its edges with exact
weighted-median line searches until no edge direction decreases the
objective. For one regressor the weighted median is the exact answer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

EPS_SCHEDULE = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)
IRLS_MAX_ITER = 50
EDGE_MAX_ITER = 500
RIDGE = 1e-8


class RankDeficientWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LadResult:
    coef: np.ndarray
    objective: float
    rank_deficient: bool = False
    iterations: int = 0


def weighted_median(z: np.ndarray, w: np.ndarray) -> float:
    """A minimiser of ``sum(w * |z - t|)`` over ``t`` (lower weighted median)."""
    keep = w > 0
    z, w = z[keep], w[keep]
    if z.size == 0:
        return 0.0
    order = np.argsort(z, kind="stable")
    z, w = z[order], w[order]
    cw = np.cumsum(w)
    k = int(np.searchsorted(cw, 0.5 * cw[-1]))
    return float(z[min(k, z.size - 1)])


def lad_objective(X: np.ndarray, y: np.ndarray, coef: np.ndarray) -> float:
    if X.shape[1] == 0:
        return float(np.abs(y).sum())
    return float(np.abs(y - X @ coef).sum())


def _irls(X, y, coef, ridge=0.0):
    d = X.shape[1]
    scale = max(float(np.mean(np.abs(y - X @ coef))), 1e-300)
    prev = lad_objective(X, y, coef)
    iters = 0
    for eps in EPS_SCHEDULE:
        e = eps * scale
        for _ in range(IRLS_MAX_ITER):
            iters += 1
            r = y - X @ coef
            w = 1.0 / np.sqrt(r * r + e * e)
            A = (X * w[:, None]).T @ X
            if ridge:
                A += ridge * np.trace(A) / d * np.eye(d)
            new = np.linalg.solve(A, (X * w[:, None]).T @ y)
            obj = lad_objective(X, y, new)
            if obj <= prev:
                coef = new
            rel = abs(prev - obj) / max(prev, 1e-300)
            prev = min(prev, obj)
            if rel < 1e-12:
                break
    return coef, iters


def _pick_basis(X, r, d):
    """Indices of ``d`` points with small |r| whose rows are linearly independent."""
    basis = []
    tol = 1e-10 * max(np.abs(X).max(), 1.0)
    for i in np.argsort(np.abs(r), kind="stable"):
        cand = basis + [int(i)]
        if np.linalg.matrix_rank(X[cand], tol=tol) == len(cand):
            basis = cand
            if len(basis) == d:
                return basis
    return None


def _edge_descent(X, y, coef):
    n, d = X.shape
    basis = _pick_basis(X, y - X @ coef, d)
    if basis is None:
        return coef, 0
    coef = np.linalg.solve(X[basis], y[basis])
    obj = lad_objective(X, y, coef)
    scale = np.abs(X).sum(axis=0).max()
    for it in range(EDGE_MAX_ITER):
        r = y - X @ coef
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        sgn = np.sign(r)
        sgn[in_basis] = 0.0
        V = np.linalg.inv(X[basis])  # column k moves off basis point k only
        A = X @ V
        g = sgn @ A  # derivative of -sum(|r|) contribution along +v_k, off-basis part
        best = None
        for k in range(d):
            for s in (1.0, -1.0):
                # directional derivative of the objective along s * v_k
                deriv = -s * g[k] + 1.0
                if deriv < -1e-12 * scale and (best is None or deriv < best[0]):
                    best = (deriv, k, s)
        if best is None:
            return coef, it
        _, k, s = best
        a = s * A[:, k]
        active = np.abs(a) > 0
        t = weighted_median(r[active] / a[active], np.abs(a[active]))
        new = coef + t * s * V[:, k]
        new_obj = lad_objective(X, y, new)
        if not new_obj < obj - 1e-15 * max(obj, 1.0):
            return coef, it
        # the point hit by the line search replaces basis point k
        idx = np.flatnonzero(active)
        hit = idx[np.argmin(np.abs(r[idx] / a[idx] - t))]
        basis = list(basis)
        basis[k] = int(hit)
        if np.linalg.matrix_rank(X[basis]) < d:
            return new, it
        # re-solve through the basis to remove drift from the line search
        vertex = np.linalg.solve(X[basis], y[basis])
        vertex_obj = lad_objective(X, y, vertex)
        coef, obj = (vertex, vertex_obj) if vertex_obj <= new_obj else (new, new_obj)
    return coef, EDGE_MAX_ITER


def lad(X: np.ndarray, y: np.ndarray) -> LadResult:
    """Minimise ``sum |y - X @ b|`` over ``b``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if d == 0:
        return LadResult(np.zeros(0), float(np.abs(y).sum()))
    if d == 1:
        x = X[:, 0]
        nz = x != 0
        if not nz.any():
            warnings.warn("regressor is identically zero", RankDeficientWarning, stacklevel=2)
            return LadResult(np.zeros(1), float(np.abs(y).sum()), rank_deficient=True)
        b = weighted_median(y[nz] / x[nz], np.abs(x[nz]))
        coef = np.array([b])
        return LadResult(coef, lad_objective(X, y, coef))
    if np.linalg.matrix_rank(X) < d:
        warnings.warn(
            "parent design is rank deficient; returning a ridge-stabilised fit",
            RankDeficientWarning,
            stacklevel=2,
        )
        G = X.T @ X
        coef = np.linalg.solve(G + RIDGE * max(np.trace(G) / d, 1e-300) * np.eye(d), X.T @ y)
        coef, iters = _irls(X, y, coef, ridge=RIDGE)
        return LadResult(coef, lad_objective(X, y, coef), rank_deficient=True, iterations=iters)
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    coef, iters = _irls(X, y, coef)
    polished, steps = _edge_descent(X, y, coef)
    if lad_objective(X, y, polished) <= lad_objective(X, y, coef):
        coef = polished
    return LadResult(coef, lad_objective(X, y, coef), iterations=iters + steps)
