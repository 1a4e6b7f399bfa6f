import random
from itertools import permutations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_vertex_arrangement
from runorder.errors import LimitExceededError, PreconditionError, UnsupportedShapeError
from runorder.reductions import IncidenceGadget, TspInstance, build_gadget_matrix, co_runs
from runorder.wheeler import (
    ProperOrdering, WheelerGraph, best_sibling_order, build_so_gadget, proper_order, so_brute_force,
    validate, wg_bwt,
)

THREE_COLUMN = [[0, 1, 0], [0, 0, 1], [1, 1, 0]]


def path_graph(labels):
    return WheelerGraph.from_edges([(i, i + 1, a) for i, a in enumerate(labels)])


def test_single_path_natural_order():
    g = path_graph([0, 1, 2])
    phi = proper_order(g, [0])
    assert phi.order == (0, 1, 2, 3)
    assert validate(g, phi) == (True, None)
    out = wg_bwt(g, phi)
    assert out.string == (0, 1, 2) and out.runs == 3


def test_crossing_same_label_edges_rejected():
    # 0 -a-> 2, 1 -a-> 3, but 3 placed before 2
    g = WheelerGraph.from_edges([(0, 2, 5), (1, 3, 5)])
    ok, why = validate(g, ProperOrdering((0, 1, 3, 2)))
    assert not ok
    assert why.edges == ((0, 2, 5), (1, 3, 5))
    assert validate(g, ProperOrdering((0, 1, 2, 3)))[0]


def test_label_order_and_sources_first():
    g = WheelerGraph.from_edges([(0, 1, 1), (0, 2, 0)])
    assert not validate(g, ProperOrdering((0, 1, 2)))[0]
    assert validate(g, ProperOrdering((0, 2, 1)))[0]
    assert not validate(g, ProperOrdering((2, 0, 1)))[0]


def test_two_paths_group_by_label():
    g = WheelerGraph.from_edges([(0, 2, 1), (2, 4, 1), (1, 3, 0), (3, 5, 0)])
    phi = proper_order(g, [0, 1])
    rank = phi.phi
    assert max(rank[3], rank[5]) < min(rank[2], rank[4])


def test_non_forest_refused():
    g = WheelerGraph.from_edges([(0, 2, 0), (1, 2, 1)])
    with pytest.raises(UnsupportedShapeError):
        proper_order(g, [0, 1])


def test_wg_bwt_requires_proper_order():
    g = WheelerGraph.from_edges([(0, 2, 5), (1, 3, 5)])
    with pytest.raises(PreconditionError):
        wg_bwt(g, ProperOrdering((0, 1, 3, 2)))


def test_duplicate_labels_grouped():
    # vertex 0 leaves with a, a, b; its successor in order starts with b
    g = WheelerGraph.from_edges([(0, 2, 0), (0, 3, 0), (0, 4, 1), (1, 5, 1), (1, 6, 2)])
    phi = proper_order(g, [0, 1])
    out = wg_bwt(g, phi)
    assert out.string[:4] == (0, 0, 1, 1)
    assert out.runs == 3


def test_gadget_shape():
    gad = build_gadget_matrix(TspInstance.from_edges([(0, 1)]))
    g = build_so_gadget(gad)
    assert g.sources == [0, 1, 2, 3]
    assert g.is_forest() and g.is_spider_forest()
    counts = [len(g.out_edges[s]) for s in g.sources]
    assert counts == [int(c) + 1 for c in gad.matrix.sum(axis=0)]


def test_three_column_gadget_paths():
    g = build_so_gadget(IncidenceGadget.from_matrix(THREE_COLUMN))
    assert len(g.sources) == 3
    # column index 1: two 1-terminated paths plus the all-zero path
    kids = [g.edges[i][1] for i in g.out_edges[1]]
    ends = []
    for v in kids:
        labels = [0]
        while g.out_edges[v]:
            e = g.edges[g.out_edges[v][0]]
            labels.append(e[2])
            v = e[1]
        ends.append(labels)
    assert sorted(map(tuple, ends)) == sorted([(0, 0, 1), (0, 0, 0, 0, 1), (0,) * 5])


def test_gadget_validates_under_every_source_order():
    g = build_so_gadget(IncidenceGadget.from_matrix([[1, 0], [0, 1], [1, 1]]))
    for p in permutations(g.sources):
        assert validate(g, proper_order(g, p))[0]
        assert validate(g, best_sibling_order(g, p)[0])[0]


def labels_in_order(g, phi):
    return [[g.edges[i][2] for i in g.out_edges[v]] for v in phi.order]


def test_three_column_gadget_runs_match_exhaustive_arrangement():
    g = build_so_gadget(IncidenceGadget.from_matrix(THREE_COLUMN))
    phi = proper_order(g, g.sources)
    assert wg_bwt(g, phi).runs == best_vertex_arrangement(labels_in_order(g, phi)) == 9


def brute_sibling_runs(g, source_rank):
    """Minimum over every per-source ordering of its children."""
    groups = [[g.edges[i][1] for i in g.out_edges[s]] for s in g.sources]
    best = None
    for pick in product(*(permutations(x) for x in groups)):
        sib = {v: k for grp in pick for k, v in enumerate(grp)}
        r = wg_bwt(g, proper_order(g, source_rank, sib)).runs
        best = r if best is None else min(best, r)
    return best


def test_best_sibling_order_is_exact_on_small_gadgets():
    for mat in ([[1, 0], [0, 1]], [[1, 1], [0, 1], [1, 0]], THREE_COLUMN):
        g = build_so_gadget(IncidenceGadget.from_matrix(mat))
        for p in permutations(g.sources):
            assert best_sibling_order(g, p)[1] == brute_sibling_runs(g, p)


def test_so_identical_subtrees_tie():
    g = WheelerGraph.from_edges([(0, 2, 0), (2, 4, 1), (1, 3, 0), (3, 5, 1)])
    res = so_brute_force(g)
    assert res.landscape[(0, 1)] == res.landscape[(1, 0)]
    assert res.order == (0, 1)


def test_so_single_source():
    res = so_brute_force(path_graph([0, 1]))
    assert res.order == (0,) and res.explored == 1


def test_so_limit():
    gad = build_gadget_matrix(TspInstance.from_edges([(0, 1), (1, 2)]))
    with pytest.raises(LimitExceededError):
        so_brute_force(build_so_gadget(gad), limit=100)


@pytest.mark.parametrize("ell", [2, 3, 4])
def test_so_argmin_matches_co_argmin(ell):
    gad = build_gadget_matrix(TspInstance.from_edges([(0, 1)]), ell)
    res = so_brute_force(build_so_gadget(gad))
    co = {p: co_runs(gad, p) for p in permutations(range(gad.n_cols))}
    best = min(co.values())
    assert res.argmin == {p for p, r in co.items() if r == best}


@st.composite
def forests(draw):
    n_src = draw(st.integers(1, 3))
    n = n_src
    edges = []
    for _ in range(draw(st.integers(0, 8))):
        u = draw(st.integers(0, n - 1))
        edges.append((u, n, draw(st.integers(0, 2))))
        n += 1
    return WheelerGraph(n, tuple(edges))


@given(forests(), st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_proper_order_always_validates(g, rnd):
    src = list(g.sources)
    rnd.shuffle(src)
    phi = proper_order(g, src)
    assert validate(g, phi) == (True, None)
    assert set(phi.order[:len(src)]) == set(src)


@given(forests())
@settings(max_examples=80, deadline=None)
def test_wg_bwt_greedy_matches_exhaustive(g):
    phi = proper_order(g, g.sources)
    slots = sum(len(g.out_edges[v]) for v in range(g.n_vertices) if len(g.out_edges[v]) > 1)
    if slots <= 10:
        assert wg_bwt(g, phi).runs == best_vertex_arrangement(labels_in_order(g, phi))


@given(st.lists(st.lists(st.integers(0, 1), min_size=2, max_size=2), min_size=1, max_size=3))
@settings(max_examples=30, deadline=None)
def test_best_sibling_order_matches_brute_on_random_gadgets(rows):
    g = build_so_gadget(IncidenceGadget.from_matrix(rows))
    rng = random.Random(len(rows))
    src = list(g.sources)
    rng.shuffle(src)
    assert best_sibling_order(g, src)[1] == brute_sibling_runs(g, src)
