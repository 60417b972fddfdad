from __future__ import annotations

import numpy as np
import pytest

from dagsel.lad import RankDeficientWarning, lad, lad_objective, weighted_median
from oracles import breakpoint_scan_lad, lp_lad


def test_weighted_median():
    assert weighted_median(np.array([3.0, 1.0, 2.0]), np.ones(3)) == 2.0
    assert weighted_median(np.array([0.0, 10.0]), np.array([1.0, 5.0])) == 10.0
    z = np.random.default_rng(0).normal(size=31)
    w = np.random.default_rng(1).uniform(size=31)
    t = weighted_median(z, w)
    grid = np.linspace(-3, 3, 6001)
    assert (w * np.abs(z - t)).sum() <= (w[:, None] * np.abs(z[:, None] - grid)).sum(axis=0).min() + 1e-12


def test_no_regressors():
    y = np.array([1.0, -2.0, 0.5])
    res = lad(np.zeros((3, 0)), y)
    assert res.coef.size == 0 and res.objective == 3.5


def test_single_parent_matches_breakpoint_scan():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        n = int(rng.integers(2, 51))
        x = rng.standard_t(3, n)
        y = rng.normal(0, 3) * x + rng.laplace(size=n) * rng.uniform(0.1, 2)
        res = lad(x[:, None], y)
        _, best = breakpoint_scan_lad(x, y)
        assert res.objective <= best + 1e-6


def test_multi_parent_matches_linear_program():
    rng = np.random.default_rng(7)
    for _ in range(150):
        n = int(rng.integers(4, 80))
        d = int(rng.integers(2, 4))
        X = rng.standard_normal((n, d))
        y = X @ rng.normal(0, 2, d) + rng.standard_t(2, n)
        res = lad(X, y)
        _, best = lp_lad(X, y)
        assert res.objective <= best + 1e-8 * max(best, 1.0)


def test_optimum_resists_random_perturbations():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((200, 2))
    y = X @ [1.0, -2.0] + rng.laplace(size=200)
    res = lad(X, y)
    pert = res.coef + rng.normal(0, 0.05, (1000, 2))
    objs = np.abs(y[:, None] - X @ pert.T).sum(axis=0)
    assert res.objective <= objs.min() + 1e-12


def test_exact_fit_recovered():
    X = np.random.default_rng(4).standard_normal((30, 2))
    y = X @ [0.5, 3.0]
    res = lad(X, y)
    assert np.allclose(res.coef, [0.5, 3.0]) and res.objective < 1e-10


def test_rank_deficient_design_warns():
    x = np.random.default_rng(5).standard_normal(20)
    X = np.column_stack([x, 2 * x])
    with pytest.warns(RankDeficientWarning):
        res = lad(X, 3 * x)
    assert res.rank_deficient
    assert res.objective == pytest.approx(lad_objective(X, 3 * x, res.coef))
    with pytest.warns(RankDeficientWarning):
        assert lad(np.zeros((5, 1)), np.ones(5)).rank_deficient


def test_deterministic():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((500, 2))
    y = X @ [1.0, 1.0] + rng.laplace(size=500)
    assert np.array_equal(lad(X, y).coef, lad(X, y).coef)
