"""Wheeler graphs restricted to forests of out-trees.

Vertices are ``0..n-1``; edges are ``(u, v, label)`` with integer labels.
A proper ordering puts sources first, orders vertices by incoming label and
keeps same-label edges from crossing.  The graph's BWT lists, in that order,
each vertex's outgoing labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .cao import greedy_tuple_order
from .errors import InvalidInputError, LimitExceededError, PreconditionError, UnsupportedShapeError
from .ranking import rank_paths
from .reductions import IncidenceGadget


@dataclass(frozen=True)
class WheelerGraph:
    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v, a in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidInputError(f"edge ({u}, {v}, {a}) leaves the vertex range")
            if (u, v, a) in seen:
                raise InvalidInputError(f"duplicate edge ({u}, {v}, {a})")
            seen.add((u, v, a))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, int]], n_vertices: int | None = None) -> "WheelerGraph":
        edges = tuple((int(u), int(v), int(a)) for u, v, a in edges)
        if n_vertices is None:
            n_vertices = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
        return cls(n_vertices, edges)

    @cached_property
    def in_degree(self) -> list[int]:
        deg = [0] * self.n_vertices
        for _, v, _ in self.edges:
            deg[v] += 1
        return deg

    @property
    def sources(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.in_degree[v] == 0]

    @cached_property
    def out_edges(self) -> list[list[int]]:
        """Edge indices leaving each vertex, in insertion order."""
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, (u, _, _) in enumerate(self.edges):
            out[u].append(i)
        return out

    def is_forest(self) -> bool:
        if any(d > 1 for d in self.in_degree):
            return False
        reached = 0
        stack = list(self.sources)
        while stack:
            u = stack.pop()
            reached += 1
            stack.extend(self.edges[i][1] for i in self.out_edges[u])
        return reached == self.n_vertices

    def is_spider_forest(self) -> bool:
        """A forest whose non-source vertices have at most one child."""
        src = set(self.sources)
        return self.is_forest() and all(len(self.out_edges[v]) <= 1 for v in range(self.n_vertices) if v not in src)


@dataclass(frozen=True)
class ProperOrdering:
    order: tuple[int, ...]  # order[k] is the vertex of rank k

    @cached_property
    def phi(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.order)}


@dataclass(frozen=True)
class WgBwt:
    string: tuple[int, ...]
    runs: int


@dataclass(frozen=True)
class Violation:
    reason: str
    edges: tuple = ()


def validate(g: WheelerGraph, phi: ProperOrdering) -> tuple[bool, Violation | None]:
    """Check sources-first and both edge conditions; report the earliest offending pair."""
    if sorted(phi.order) != list(range(g.n_vertices)):
        raise InvalidInputError("ordering is not a bijection on the vertices")
    rank = phi.phi
    src = g.sources
    for v in src:
        if rank[v] >= len(src):
            return False, Violation(f"source {v} is not among the first {len(src)} ranks", ())
    edges = sorted(g.edges, key=lambda e: (e[2], rank[e[0]], rank[e[1]]))
    for a, b in zip(edges, edges[1:]):
        if a[2] == b[2]:
            if rank[a[1]] > rank[b[1]]:
                return False, Violation("same-label edges cross", (a, b))
        elif rank[a[1]] >= rank[b[1]]:
            return False, Violation("smaller label does not reach a smaller target", (a, b))
    return True, None


def _classes(g: WheelerGraph, source_rank: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """Dense class rank per vertex (sources by given rank, others by label then parent class)."""
    src = list(source_rank)
    n = g.n_vertices
    codes = np.zeros(n, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    for r, s in enumerate(src):
        codes[s] = r
    parent = [-1] * n
    for u, v, a in g.edges:
        codes[v] = len(src) + a
        nxt[v] = u
        parent[v] = u
    return rank_paths(codes, nxt), parent


def proper_order(g: WheelerGraph, source_rank: Sequence[int],
                 sibling_rank: dict[int, int] | None = None) -> ProperOrdering:
    """Sources in the given order, then vertices by (incoming label, parent rank).

    Vertices with equal keys are same-label siblings or descendants of such;
    they follow their parents' order, then ``sibling_rank`` (default: edge
    insertion order).
    """
    if not g.is_forest():
        raise UnsupportedShapeError("proper_order needs a forest of out-trees")
    if sorted(source_rank) != sorted(g.sources):
        raise InvalidInputError("source_rank must be a permutation of the sources")
    cls, parent = _classes(g, source_rank)
    if sibling_rank is None:
        sibling_rank = {v: i for i, (_, v, _) in enumerate(g.edges)}
    pos: dict[int, int] = {s: 0 for s in source_rank}
    # breadth-first, so a parent's position inside its class is final before its children are placed
    level = list(source_rank)
    while level:
        children = [g.edges[i][1] for u in level for i in g.out_edges[u]]
        children.sort(key=lambda v: (int(cls[v]), pos[parent[v]], sibling_rank.get(v, 0)))
        count: dict[int, int] = {}
        for v in children:
            c = int(cls[v])
            pos[v] = count.get(c, 0)
            count[c] = pos[v] + 1
        level = children
    order = sorted(range(g.n_vertices), key=lambda v: (int(cls[v]), pos[v]))
    return ProperOrdering(tuple(order))


def _vertex_tuples(g: WheelerGraph, phi: ProperOrdering) -> tuple[list[tuple[int, ...]], list[dict[int, int]]]:
    tuples, counts = [], []
    for v in phi.order:
        labels = [g.edges[i][2] for i in g.out_edges[v]]
        if labels:
            c: dict[int, int] = {}
            for a in labels:
                c[a] = c.get(a, 0) + 1
            tuples.append(tuple(sorted(c)))
            counts.append(c)
    return tuples, counts


def wg_bwt(g: WheelerGraph, phi: ProperOrdering) -> WgBwt:
    """Outgoing labels per vertex in ``phi`` order, each vertex's labels grouped
    and arranged by the tuple greedy to minimise the total run count."""
    ok, why = validate(g, phi)
    if not ok:
        raise PreconditionError(f"ordering is not proper: {why.reason}")
    tuples, counts = _vertex_tuples(g, phi)
    arr = greedy_tuple_order(tuples)
    string = tuple(a for t, c in zip(arr.order, counts) for a in t for _ in range(c[a]))
    return WgBwt(string, arr.runs)


def best_sibling_order(g: WheelerGraph, source_rank: Sequence[int]) -> tuple[ProperOrdering, int]:
    """Proper ordering with the fewest BWT runs for a fixed source order.

    Exact on spider forests: vertices sharing a class form a block, the
    blocks' distinct out-labels are arranged by the tuple greedy, and a walk
    over the class tree turns the arrangement into a sibling order.  Other
    forests fall back to insertion order.
    """
    if not g.is_spider_forest():
        phi = proper_order(g, source_rank)
        return phi, wg_bwt(g, phi).runs
    cls, parent = _classes(g, source_rank)
    n_cls = int(cls.max()) + 1 if g.n_vertices else 0
    members: list[list[int]] = [[] for _ in range(n_cls)]
    for v in range(g.n_vertices):
        members[int(cls[v])].append(v)
    out_label = {v: g.edges[g.out_edges[v][0]][2] for v in range(g.n_vertices) if len(g.out_edges[v]) == 1}
    # block tuples; a source is its own class and may carry several labels
    block_tuples: list[tuple[int, ...]] = []
    block_ids: list[int] = []
    for c in range(n_cls):
        labs = sorted({g.edges[i][2] for v in members[c] for i in g.out_edges[v]})
        if labs:
            block_tuples.append(tuple(labs))
            block_ids.append(c)
    arr = greedy_tuple_order(block_tuples)
    arranged = dict(zip(block_ids, arr.order))

    # child class reached from class c by label a
    child_cls: dict[tuple[int, int], int] = {}
    for u, v, a in g.edges:
        child_cls[(int(cls[u]), a)] = int(cls[v])

    def thread_order(c: int) -> list[int]:
        """Members of class c, ordered so each arranged label group is contiguous."""
        out: list[int] = []
        stack: list[tuple[bool, int]] = [(False, c)]
        while stack:
            is_vertex, x = stack.pop()
            if is_vertex:
                out.append(x)
                continue
            todo: list[tuple[bool, int]] = []
            for a in arranged.get(x, ()):
                todo.append((False, child_cls[(x, a)]))
            todo.extend((True, v) for v in members[x] if v not in out_label)
            stack.extend(reversed(todo))
        return out

    # every deepest descendant identifies its thread; map back to the depth-1 vertex
    sibling_rank: dict[int, int] = {}
    for s in source_rank:
        for a in arranged.get(int(cls[s]), ()):
            leaves = thread_order(child_cls[(int(cls[s]), a)])
            for k, leaf in enumerate(leaves):
                v = leaf
                while parent[v] != s:
                    v = parent[v]
                sibling_rank[v] = k
    phi = proper_order(g, source_rank, sibling_rank)
    got = wg_bwt(g, phi)
    if got.runs != arr.runs:
        raise AssertionError(f"realised {got.runs} runs, block arrangement promised {arr.runs}")
    return phi, got.runs


def build_so_gadget(gad: IncidenceGadget) -> WheelerGraph:
    """One source per column; per 1 in row r a path ``0^(r+2) 1``; per column a path ``0^(rows+2)``.

    Vertex ``j`` is the source of column ``j``.
    """
    rows, cols = gad.matrix.shape
    edges: list[tuple[int, int, int]] = []
    nxt = cols

    def path(s: int, labels: list[int]):
        nonlocal nxt
        u = s
        for a in labels:
            edges.append((u, nxt, a))
            u = nxt
            nxt += 1

    for j in range(cols):
        for r in range(rows):
            if gad.matrix[r, j]:
                path(j, [0] * (r + 2) + [1])
        path(j, [0] * (rows + 2))
    return WheelerGraph(nxt, tuple(edges))


@dataclass
class SoResult:
    order: tuple[int, ...]
    runs: int
    explored: int
    landscape: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)

    @property
    def argmin(self) -> set[tuple[int, ...]]:
        return {p for p, r in self.landscape.items() if r == self.runs}


def so_brute_force(g: WheelerGraph, limit: int = 40320) -> SoResult:
    """Minimum BWT runs over every source order (first minimum in lexicographic order)."""
    src = g.sources
    count = math.factorial(len(src))
    if count > limit:
        raise LimitExceededError(f"{count} source orders exceed the limit {limit}")
    landscape = {}
    for p in permutations(src):
        landscape[p] = best_sibling_order(g, p)[1]
    best = min(landscape, key=lambda p: (landscape[p], p))
    return SoResult(best, landscape[best], count, landscape)
