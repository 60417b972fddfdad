from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagsel.graph import (
    CycleError,
    Dag,
    enumerate_dags,
    is_supergraph,
    skeleton_and_vstructures,
    topological_order,
    total_effects,
)


def brute_force_count(p):
    pairs = [(a, b) for a in range(p) for b in range(p) if a != b]
    count = 0
    for keep in itertools.product((0, 1), repeat=len(pairs)):
        g = nx.DiGraph()
        g.add_nodes_from(range(p))
        g.add_edges_from(e for e, k in zip(pairs, keep) if k)
        count += nx.is_directed_acyclic_graph(g)
    return count


@st.composite
def random_dags(draw, max_p=5):
    p = draw(st.integers(1, max_p))
    perm = draw(st.permutations(range(p)))
    edges = []
    for a, b in itertools.combinations(range(p), 2):
        if draw(st.booleans()):
            edges.append((perm[a], perm[b]))
    return Dag.from_edges(p, edges)


def test_parse_roundtrip():
    g = Dag.parse("p=4; edges=3->2,3->1")
    assert g.parent_list(1) == [2] and g.parent_list(0) == [2]
    assert Dag.parse(str(g)) == g
    assert str(Dag.empty(2)) == "p=2; edges="


def test_invalid_graphs():
    with pytest.raises(CycleError):
        Dag.parse("p=2; edges=1->2,2->1")
    with pytest.raises(ValueError):
        Dag.parse("p=2; edges=1->1")
    with pytest.raises(ValueError):
        Dag.parse("p=2; edges=1->3")
    with pytest.raises(ValueError):
        Dag.parse("edges=1->2")
    with pytest.raises(ValueError):
        Dag(13, (0,) * 13)


@pytest.mark.parametrize("p, expected", [(1, 1), (2, 3), (3, 25), (4, 543)])
def test_enumeration_counts(p, expected):
    dags = enumerate_dags(p)
    assert len(dags) == expected
    assert len(set(dags)) == expected


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_enumeration_matches_brute_force(p):
    assert len(enumerate_dags(p)) == brute_force_count(p)


def test_enumeration_order_is_lexicographic():
    dags = enumerate_dags(3)
    assert [g.parents for g in dags] == sorted(g.parents for g in dags)


def test_enumeration_guard():
    with pytest.raises(ValueError):
        enumerate_dags(6)
    with pytest.raises(ValueError):
        enumerate_dags(0)


def test_topological_order_examples():
    assert topological_order(Dag.empty(3)) == (0, 1, 2)
    assert topological_order(Dag.parse("p=3; edges=1->2,2->3")) == (0, 1, 2)
    order = topological_order(Dag.parse("p=4; edges=3->2,3->1"))
    assert order[0] == 2


@pytest.mark.parametrize("p", [3, 4])
def test_every_enumerated_dag_has_valid_order(p):
    for g in enumerate_dags(p):
        pos = {v: i for i, v in enumerate(topological_order(g))}
        assert all(pos[k] < pos[j] for k, j in g.edges())


def test_supergraph():
    chain = Dag.parse("p=3; edges=1->2,2->3")
    full = Dag.parse("p=3; edges=1->2,1->3,2->3")
    assert is_supergraph(chain, chain)
    assert is_supergraph(full, chain)
    assert not is_supergraph(chain, Dag.parse("p=3; edges=1->2,3->2"))
    with pytest.raises(ValueError):
        is_supergraph(chain, Dag.empty(2))


def test_total_effects_examples():
    assert np.array_equal(total_effects(Dag.empty(3), {}), np.eye(3))
    T = total_effects(Dag.parse("p=3; edges=1->2,2->3"), {(0, 1): 2.5, (1, 2): 1.8})
    assert T[2, 0] == pytest.approx(4.5)
    T = total_effects(Dag.parse("p=4; edges=3->2,3->1"), {(2, 1): 1.5, (2, 0): -3.2})
    assert T[1, 2] == 1.5 and T[0, 2] == -3.2 and T[0, 1] == 0.0


def test_total_effects_errors():
    g = Dag.parse("p=2; edges=1->2")
    with pytest.raises(ValueError):
        total_effects(g, {(0, 1): 1.0, (1, 0): 2.0})
    with pytest.raises(ValueError):
        total_effects(g, {})


def test_total_effects_against_matrix_inverse():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        p = int(rng.integers(1, 6))
        perm = rng.permutation(p)
        edges = [(int(perm[a]), int(perm[b])) for a, b in itertools.combinations(range(p), 2) if rng.random() < 0.5]
        g = Dag.from_edges(p, edges)
        coeffs = {e: float(rng.normal(0, 2)) for e in g.edges()}
        B = np.zeros((p, p))
        for (k, j), c in coeffs.items():
            B[j, k] = c
        T = total_effects(g, coeffs)
        assert np.allclose(T, np.linalg.inv(np.eye(p) - B), atol=1e-12, rtol=1e-12)
        order = topological_order(g)
        assert np.allclose(np.triu(T[np.ix_(order, order)], 1), 0)
        assert np.allclose(np.diag(T), 1)


def test_vstructures():
    _, vs = skeleton_and_vstructures(Dag.parse("p=3; edges=1->3,2->3"))
    assert vs == {(0, 2, 1)}
    assert skeleton_and_vstructures(Dag.parse("p=3; edges=1->2,2->3"))[1] == frozenset()
    assert skeleton_and_vstructures(Dag.parse("p=3; edges=1->2,1->3,2->3"))[1] == frozenset()


@settings(max_examples=200, deadline=None)
@given(random_dags())
def test_edge_count_and_ancestry(g):
    assert g.n_edges == len(g.edges()) == sum(len(g.parent_list(j)) for j in range(g.p))
    nxg = nx.DiGraph(g.edges())
    nxg.add_nodes_from(range(g.p))
    for j in range(g.p):
        assert g.ancestors(j) == nx.ancestors(nxg, j)
        assert g.descendants(j) == nx.descendants(nxg, j)
