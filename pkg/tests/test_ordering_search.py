from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import admissible_orderings, naive_bwt, runs_of
from runorder.bwt_core import AlphabetOrdering, Text, build_bwt, byte_symbol, terminator
from runorder.errors import LimitExceededError
from runorder.ordering_search import admissible_count, exact_search, local_search, ratio_report


def brute_minimum(text):
    text = Text.of(text)
    best = None
    for syms in admissible_orderings(text.alphabet):
        o = AlphabetOrdering(syms)
        key = (runs_of(naive_bwt(text.symbols, o)), o.rank_vector())
        if best is None or key < best[0]:
            best = (key, o)
    return best[0][0], best[1]


def test_mississippi_exact():
    res = exact_search("mississippi")
    assert res.runs == 7
    assert str(res.ordering) == "$,p,i,m,s"
    assert res.explored == 24
    assert build_bwt("mississippi", res.ordering).runs == 7


def test_local_search_reaches_exact_minimum():
    res = local_search("mississippi", budget=200, rng_seed=3)
    assert res.runs == 7
    assert build_bwt("mississippi", res.ordering).runs == res.runs


def test_local_search_never_worse_than_seed():
    seed = AlphabetOrdering.of("$imps")
    res = local_search("mississippi", seed=seed, budget=0)
    assert res.runs == 9
    assert res.ordering == seed


def test_limit_refuses_large_alphabets():
    with pytest.raises(LimitExceededError):
        exact_search("abcdefghijk", limit=10)


def test_parallel_matches_sequential():
    s = "abracadabra_cabbage"
    a, b = exact_search(s, threads=1), exact_search(s, threads=2)
    assert (a.runs, a.ordering, a.explored) == (b.runs, b.ordering, b.explored)


def test_terminators_stay_below_regulars():
    syms = [byte_symbol("b"), terminator(1), byte_symbol("a"), terminator(2)]
    res = exact_search(syms)
    kinds = [s.kind for s in res.ordering.symbols]
    assert kinds == sorted(kinds)
    assert res.explored == admissible_count(Text.of(syms)) == 4


def test_ratio_report_mississippi():
    rep = ratio_report("mississippi")
    assert (rep.min_runs, rep.max_runs, rep.explored) == (7, 9, 24)
    assert rep.ratio == Fraction(9, 7)
    assert rep.doubling_bound == 2 * 8 + 2


def test_ratio_sampled_is_deterministic():
    a = ratio_report("abracadabra", mode="sampled", samples=50, rng_seed=5)
    b = ratio_report("abracadabra", mode="sampled", samples=50, rng_seed=5)
    assert a == b
    assert a.explored == 50


@given(st.text(alphabet="abcd", min_size=1, max_size=25))
@settings(max_examples=40, deadline=None)
def test_exact_matches_brute_force(s):
    runs, ordering = brute_minimum(s)
    res = exact_search(s)
    assert res.runs == runs
    assert res.ordering == ordering


@given(st.text(alphabet="abcd", min_size=1, max_size=25), st.integers(0, 50))
@settings(max_examples=30, deadline=None)
def test_local_search_bounded_by_exact_and_seed(s, seed):
    exact = exact_search(s).runs
    start = AlphabetOrdering.standard(Text.of(s).alphabet)
    res = local_search(s, seed=start, budget=30, rng_seed=seed)
    assert exact <= res.runs <= build_bwt(s, start).runs
    assert build_bwt(s, res.ordering).runs == res.runs
