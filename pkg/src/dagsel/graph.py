"""DAG representation, enumeration and structural queries.

Nodes are 0-based everywhere in the Python API. The text format
``p=<int>; edges=k->j,...`` uses 1-based indices, matching how graphs are
written by hand.
"""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

MAX_NODES = 12
MAX_ENUM_NODES = 5


class CycleError(ValueError):
    pass


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _is_acyclic(parents: tuple[int, ...]) -> bool:
    p = len(parents)
    remaining = (1 << p) - 1
    while remaining:
        roots = 0
        for j in _bits(remaining):
            if parents[j] & remaining == 0:
                roots |= 1 << j
        if not roots:
            return False
        remaining &= ~roots
    return True


@dataclass(frozen=True)
class Dag:
    """A labelled DAG on ``p`` nodes stored as per-node parent bit-sets."""

    p: int
    parents: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.p <= MAX_NODES:
            raise ValueError(f"node count must be in [1, {MAX_NODES}], got {self.p}")
        if len(self.parents) != self.p:
            raise ValueError("need one parent set per node")
        full = (1 << self.p) - 1
        for j, mask in enumerate(self.parents):
            if mask & ~full:
                raise ValueError(f"parent index out of range for node {j}")
            if mask >> j & 1:
                raise ValueError(f"self-loop on node {j}")
        if not _is_acyclic(self.parents):
            raise CycleError("graph contains a directed cycle")

    @classmethod
    def empty(cls, p: int) -> Dag:
        return cls(p, (0,) * p)

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[tuple[int, int]]) -> Dag:
        """Build from 0-based ``(parent, child)`` pairs."""
        masks = [0] * p
        for k, j in edges:
            if not (0 <= k < p and 0 <= j < p):
                raise ValueError(f"edge ({k}, {j}) out of range for p={p}")
            masks[j] |= 1 << k
        return cls(p, tuple(masks))

    @classmethod
    def parse(cls, text: str) -> Dag:
        """Parse ``p=3; edges=1->2,2->3`` (1-based)."""
        fields = _parse_fields(text)
        if "p" not in fields:
            raise ValueError(f"missing 'p=' in {text!r}")
        p = int(fields["p"])
        edges = []
        for tok in _split_list(fields.get("edges", "")):
            m = re.fullmatch(r"(\d+)\s*->\s*(\d+)", tok)
            if not m:
                raise ValueError(f"bad edge token {tok!r}")
            edges.append((int(m.group(1)) - 1, int(m.group(2)) - 1))
        return cls.from_edges(p, edges)

    def __str__(self) -> str:
        edges = ",".join(f"{k + 1}->{j + 1}" for k, j in self.edges())
        return f"p={self.p}; edges={edges}"

    def parent_list(self, j: int) -> list[int]:
        return _bits(self.parents[j])

    def children(self, k: int) -> list[int]:
        return [j for j in range(self.p) if self.parents[j] >> k & 1]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(parent, child)``, sorted by child then parent."""
        return [(k, j) for j in range(self.p) for k in _bits(self.parents[j])]

    @property
    def n_edges(self) -> int:
        return sum(bin(m).count("1") for m in self.parents)

    def has_edge(self, k: int, j: int) -> bool:
        return bool(self.parents[j] >> k & 1)

    def adjacent(self, a: int, b: int) -> bool:
        return self.has_edge(a, b) or self.has_edge(b, a)

    def with_edge(self, k: int, j: int) -> Dag:
        masks = list(self.parents)
        masks[j] |= 1 << k
        return Dag(self.p, tuple(masks))

    def without_edge(self, k: int, j: int) -> Dag:
        masks = list(self.parents)
        masks[j] &= ~(1 << k)
        return Dag(self.p, tuple(masks))

    def ancestors(self, j: int) -> set[int]:
        seen: set[int] = set()
        stack = self.parent_list(j)
        while stack:
            k = stack.pop()
            if k not in seen:
                seen.add(k)
                stack.extend(self.parent_list(k))
        return seen

    def descendants(self, k: int) -> set[int]:
        seen: set[int] = set()
        stack = self.children(k)
        while stack:
            j = stack.pop()
            if j not in seen:
                seen.add(j)
                stack.extend(self.children(j))
        return seen


def _parse_fields(text: str) -> dict[str, str]:
    fields = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        fields[key.strip()] = value.strip()
    return fields


def _split_list(value: str) -> list[str]:
    return [t.strip() for t in value.split(",") if t.strip()]


def _check_same_p(g1: Dag, g2: Dag) -> None:
    if g1.p != g2.p:
        raise ValueError(f"node counts differ: {g1.p} vs {g2.p}")


@lru_cache(maxsize=None)
def _enumerate(p: int) -> tuple[Dag, ...]:
    choices = []
    for j in range(p):
        others = [k for k in range(p) if k != j]
        masks = sorted(
            sum(1 << k for k in subset)
            for r in range(len(others) + 1)
            for subset in itertools.combinations(others, r)
        )
        choices.append(masks)
    out = []
    for combo in itertools.product(*choices):
        if _is_acyclic(combo):
            out.append(Dag(p, combo))
    return tuple(out)


def enumerate_dags(p: int) -> list[Dag]:
    """All labelled DAGs on ``p`` nodes, ordered lexicographically by parent bit-sets."""
    if not 1 <= p <= MAX_ENUM_NODES:
        raise ValueError(f"exhaustive enumeration supports 1 <= p <= {MAX_ENUM_NODES}, got {p}")
    return list(_enumerate(p))


def topological_order(g: Dag) -> tuple[int, ...]:
    """Causal order as a node sequence; ties broken by smallest index."""
    indeg = [bin(m).count("1") for m in g.parents]
    heap = [j for j in range(g.p) if indeg[j] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        k = heapq.heappop(heap)
        order.append(k)
        for j in g.children(k):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(order) != g.p:
        raise CycleError("cycle detected")
    return tuple(order)


def order_positions(order: Iterable[int]) -> dict[int, int]:
    return {node: pos for pos, node in enumerate(order)}


def is_supergraph(g1: Dag, g2: Dag) -> bool:
    """True iff every edge of ``g2`` is in ``g1``."""
    _check_same_p(g1, g2)
    return all(m2 & ~m1 == 0 for m1, m2 in zip(g1.parents, g2.parents))


def total_effects(g: Dag, coeffs: Mapping[tuple[int, int], float]) -> np.ndarray:
    """Matrix ``T`` with ``T[j, s]`` the total effect of node ``s`` on node ``j``.

    ``coeffs`` maps 0-based ``(parent, child)`` edges to direct effects and must
    cover exactly the edges of ``g``.
    """
    edges = set(g.edges())
    extra = set(coeffs) - edges
    if extra:
        raise ValueError(f"coefficients given for non-edges: {sorted(extra)}")
    missing = edges - set(coeffs)
    if missing:
        raise ValueError(f"missing coefficients for edges: {sorted(missing)}")
    T = np.eye(g.p)
    for j in topological_order(g):
        for k in g.parent_list(j):
            T[j] += coeffs[(k, j)] * T[k]
    return T


def skeleton_and_vstructures(g: Dag) -> tuple[frozenset, frozenset]:
    """Undirected skeleton as ``(a, b)`` with ``a < b``, and v-structures ``(a, c, b)`` with ``a < b``."""
    skel = frozenset((min(k, j), max(k, j)) for k, j in g.edges())
    vs = set()
    for c in range(g.p):
        pa = g.parent_list(c)
        for a, b in itertools.combinations(pa, 2):
            if not g.adjacent(a, b):
                vs.add((a, c, b))
    return skel, frozenset(vs)
