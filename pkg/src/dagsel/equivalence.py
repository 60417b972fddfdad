"""Markov equivalence, CPDAGs and the restricted CPDAG for partially non-Gaussian SEMs."""

from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass
from typing import Iterable

from .graph import Dag, CycleError, _check_same_p, _parse_fields, _split_list, skeleton_and_vstructures

MAX_EXTENSION_EDGES = 20


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph: directed ``(a, b)`` means a -> b; undirected pairs have ``a < b``."""

    p: int
    directed: frozenset
    undirected: frozenset

    def __post_init__(self):
        adj_dir = {frozenset(e) for e in self.directed}
        if len(adj_dir) != len(self.directed):
            raise ValueError("an adjacency is directed both ways")
        for a, b in self.undirected:
            if a >= b:
                raise ValueError("undirected pairs must be stored with a < b")
            if frozenset((a, b)) in adj_dir:
                raise ValueError(f"adjacency {a}-{b} is both directed and undirected")
        Dag.from_edges(self.p, self.directed)  # acyclicity of the directed part

    @classmethod
    def parse(cls, text: str) -> Pdag:
        fields = _parse_fields(text)
        p = int(fields["p"])
        directed, undirected = set(), set()
        for tok in _split_list(fields.get("directed", "")):
            m = re.fullmatch(r"(\d+)\s*->\s*(\d+)", tok)
            if not m:
                raise ValueError(f"bad directed edge {tok!r}")
            directed.add((int(m.group(1)) - 1, int(m.group(2)) - 1))
        for tok in _split_list(fields.get("undirected", "")):
            m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", tok)
            if not m:
                raise ValueError(f"bad undirected edge {tok!r}")
            a, b = int(m.group(1)) - 1, int(m.group(2)) - 1
            undirected.add((min(a, b), max(a, b)))
        return cls(p, frozenset(directed), frozenset(undirected))

    def __str__(self) -> str:
        d = ",".join(f"{a + 1}->{b + 1}" for a, b in sorted(self.directed, key=lambda e: (e[1], e[0])))
        u = ",".join(f"{a + 1}-{b + 1}" for a, b in sorted(self.undirected))
        return f"p={self.p}; directed={d}; undirected={u}"

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.directed or (b, a) in self.directed or (min(a, b), max(a, b)) in self.undirected


def markov_equivalent(g1: Dag, g2: Dag) -> bool:
    _check_same_p(g1, g2)
    return skeleton_and_vstructures(g1) == skeleton_and_vstructures(g2)


class _Mixed:
    """Mutable working copy used while applying orientation rules."""

    def __init__(self, p: int, directed: Iterable, undirected: Iterable):
        self.p = p
        self.directed = set(directed)
        self.undirected = {frozenset(e) for e in undirected}

    def adj(self, a, b):
        return (a, b) in self.directed or (b, a) in self.directed or frozenset((a, b)) in self.undirected

    def und(self, a, b):
        return frozenset((a, b)) in self.undirected

    def arrow(self, a, b):
        return (a, b) in self.directed

    def orient(self, a, b):
        self.undirected.discard(frozenset((a, b)))
        self.directed.add((a, b))

    def freeze(self) -> Pdag:
        und = frozenset((min(e), max(e)) for e in self.undirected)
        return Pdag(self.p, frozenset(self.directed), und)


def _meek_pass(g: _Mixed) -> bool:
    nodes = range(g.p)
    for e in sorted(g.undirected, key=sorted):
        x, y = sorted(e)
        for a, b in ((x, y), (y, x)):
            # R1: c -> a - b, c and b non-adjacent
            if any(g.arrow(c, a) and not g.adj(c, b) for c in nodes if c not in (a, b)):
                g.orient(a, b)
                return True
            # R2: a -> c -> b with a - b
            if any(g.arrow(a, c) and g.arrow(c, b) for c in nodes if c not in (a, b)):
                g.orient(a, b)
                return True
            # R3: a - c -> b, a - d -> b, c and d non-adjacent
            cands = [c for c in nodes if c not in (a, b) and g.und(a, c) and g.arrow(c, b)]
            if any(not g.adj(c, d) for c, d in itertools.combinations(cands, 2)):
                g.orient(a, b)
                return True
            # R4: a - d -> b, c -> d, c adjacent to a, c and b non-adjacent
            for d in nodes:
                if d in (a, b) or not (g.und(a, d) and g.arrow(d, b)):
                    continue
                if any(
                    g.arrow(c, d) and g.adj(c, a) and not g.adj(c, b)
                    for c in nodes
                    if c not in (a, b, d)
                ):
                    g.orient(a, b)
                    return True
    return False


def meek_closure(pdag: Pdag) -> Pdag:
    """Apply Meek rules R1-R4 until no undirected edge can be oriented."""
    g = _Mixed(pdag.p, pdag.directed, pdag.undirected)
    while _meek_pass(g):
        pass
    return g.freeze()


def cpdag(g: Dag) -> Pdag:
    """Completed partially directed graph of the Markov class of ``g``."""
    skel, vs = skeleton_and_vstructures(g)
    directed = set()
    for a, c, b in vs:
        directed.add((a, c))
        directed.add((b, c))
    undirected = {e for e in skel if (e[0], e[1]) not in directed and (e[1], e[0]) not in directed}
    return meek_closure(Pdag(g.p, frozenset(directed), frozenset(undirected)))


def consistent_extensions(pdag: Pdag) -> list[Dag]:
    """Every DAG obtained by orienting the undirected edges (acyclic, no new v-structures)."""
    und = sorted(pdag.undirected)
    if len(und) > MAX_EXTENSION_EDGES:
        raise ValueError(f"too many undirected edges to enumerate ({len(und)})")
    base = Dag.from_edges(pdag.p, pdag.directed)
    _, base_vs = skeleton_and_vstructures(base)
    # v-structures already implied by the directed part must be exactly those of the pattern
    out = []
    for flips in itertools.product((False, True), repeat=len(und)):
        edges = list(pdag.directed)
        edges += [(b, a) if f else (a, b) for (a, b), f in zip(und, flips)]
        try:
            d = Dag.from_edges(pdag.p, edges)
        except CycleError:
            continue
        _, vs = skeleton_and_vstructures(d)
        if vs == _pattern_vstructures(pdag):
            out.append(d)
    return out


def _pattern_vstructures(pdag: Pdag) -> frozenset:
    vs = set()
    for c in range(pdag.p):
        pa = sorted(a for a, b in pdag.directed if b == c)
        for a, b in itertools.combinations(pa, 2):
            if not pdag.adjacent(a, b):
                vs.add((a, c, b))
    return frozenset(vs)


def markov_class(g: Dag) -> set[Dag]:
    """All DAGs Markov equivalent to ``g`` (via consistent extensions of its CPDAG)."""
    return {d for d in consistent_extensions(cpdag(g)) if markov_equivalent(d, g)}


def _check_nodes(p: int, ng: Iterable[int]) -> frozenset:
    ng = frozenset(ng)
    bad = [j for j in ng if not 0 <= j < p]
    if bad:
        raise ValueError(f"invalid node(s) in non-Gaussian set: {bad}")
    return ng


def res_cpdag(gstar: Dag, ng: Iterable[int]) -> Pdag:
    """CPDAG of ``gstar`` with orientations restored at non-Gaussian nodes and Meek-closed.

    Steps: take the CPDAG; orient every undirected edge touching a node of
    ``ng`` as in ``gstar``; close under Meek rules.
    """
    ng = _check_nodes(gstar.p, ng)
    base = cpdag(gstar)
    g = _Mixed(base.p, base.directed, base.undirected)
    for k, j in gstar.edges():
        if (j in ng or k in ng) and g.und(k, j):
            g.orient(k, j)
    while _meek_pass(g):
        pass
    out = g.freeze()
    for j in ng:
        pa = {a for a, b in out.directed if b == j}
        if pa != set(gstar.parent_list(j)):
            warnings.warn(f"orientation closure altered parents of non-Gaussian node {j + 1}", stacklevel=2)
    return out


def distribution_equivalence_class(gstar: Dag, ng: Iterable[int]) -> set[Dag]:
    """Markov-equivalent DAGs that keep the true parent set of every node in ``ng``."""
    ng = _check_nodes(gstar.p, ng)
    return {
        d for d in markov_class(gstar) if all(d.parents[j] == gstar.parents[j] for j in ng)
    }


def ancestral_restriction_holds(g: Dag, gstar: Dag, ng: Iterable[int]) -> bool:
    """No true descendant of a non-Gaussian node may be an ancestor in ``g`` of that node's true ancestors."""
    _check_same_p(g, gstar)
    ng = _check_nodes(gstar.p, ng)
    for j in ng:
        upstream = gstar.ancestors(j) | {j}
        downstream = gstar.descendants(j)
        for k in upstream:
            if downstream & g.ancestors(k):
                return False
    return True
