import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_bwt, naive_circular_bwt, runs_of
from runorder.bwt_core import (
    SENTINEL, AlphabetOrdering, Kind, Text, build_bwt, byte_symbol, circular_bwt, count_runs,
    invert_bwt, lf_path, regular, terminator,
)
from runorder.errors import AlphabetMismatchError, InvalidInputError, MalformedBwtError
from runorder.ranking import rank_paths, suffix_array

texts = st.text(alphabet="abcde", min_size=0, max_size=40)


def shuffled_ordering(text, seed):
    syms = sorted(set(Text.of(text).alphabet))
    random.Random(seed).shuffle(syms)
    return AlphabetOrdering.of(syms)


def test_mississippi_standard():
    out = build_bwt("mississippi")
    assert str(out) == "ipssm$pissii"
    assert out.runs == 9


def test_mississippi_reordered():
    out = build_bwt("mississippi", AlphabetOrdering.of("$sipm"))
    assert out.runs == 8
    assert str(out) == "iiisspmsspi$"


def test_banana_and_unary():
    assert str(build_bwt("banana")) == "annb$aa"
    assert str(build_bwt("aaa")) == "aaa$"
    assert build_bwt("aaa").runs == 2


def test_empty_text():
    out = build_bwt("")
    assert out.bwt == (SENTINEL,)
    assert invert_bwt(out).symbols == ()


def test_lf_path_spells_reverse_text():
    assert "".join(map(str, lf_path(build_bwt("mississippi")))) == "ippississim$"
    assert "".join(map(str, lf_path(build_bwt("banana")))) == "ananab$"


def test_ordering_validation():
    a, b = byte_symbol("a"), byte_symbol("b")
    with pytest.raises(InvalidInputError):
        AlphabetOrdering((a, SENTINEL))
    with pytest.raises(InvalidInputError):
        AlphabetOrdering((SENTINEL, a, a))
    with pytest.raises(InvalidInputError):
        AlphabetOrdering((SENTINEL, a, terminator(1)))
    o = AlphabetOrdering.of("ba")
    assert o.rank == {SENTINEL: 0, b: 1, a: 2}
    assert o.rank_vector() == (0, 2, 1)


def test_ordering_must_cover_text():
    with pytest.raises(AlphabetMismatchError):
        build_bwt("abc", AlphabetOrdering.of("ab"))


def test_text_rejects_sentinel_and_repeated_terminators():
    with pytest.raises(InvalidInputError):
        Text.of([SENTINEL])
    t = terminator(1)
    with pytest.raises(InvalidInputError):
        Text.of([t, byte_symbol("a"), t])


def test_declared_alphabet_may_exceed_text():
    extra = regular(ord("z"))
    text = Text.of("ab", alphabet={byte_symbol("a"), byte_symbol("b"), extra})
    assert str(build_bwt(text)) == "b$a"


def test_invert_rejects_malformed():
    with pytest.raises(MalformedBwtError):
        invert_bwt("ab")
    with pytest.raises(MalformedBwtError):
        invert_bwt("a$b$")
    # two cycles: the walk returns to the sentinel row too early
    with pytest.raises(MalformedBwtError):
        invert_bwt("$ba")


def test_circular_requires_unique_last_symbol():
    with pytest.raises(InvalidInputError):
        circular_bwt("abca")
    out = circular_bwt([byte_symbol("a"), byte_symbol("b"), terminator(0)])
    assert out.runs == 3


def test_count_runs_variants():
    assert count_runs("") == 0
    assert count_runs("aabbba") == 3
    assert count_runs(np.array([1, 1, 2, 2, 1])) == 3
    assert count_runs(np.array([], dtype=int)) == 0


def test_rank_paths_equal_strings_share_rank():
    # chains: 0->1, 2->3, 4 alone; strings "ab", "ab", "a"
    r = rank_paths([1, 2, 1, 2, 1], [1, -1, 3, -1, -1])
    assert r[0] == r[2]
    assert r[4] < r[0]  # proper prefix first
    assert r[1] == r[3]


@given(texts)
def test_suffix_array_matches_sorting(s):
    codes = [ord(c) for c in s]
    expect = sorted(range(len(s)), key=lambda i: codes[i:])
    assert suffix_array(np.array(codes, dtype=np.int64)).tolist() == expect


@given(texts, st.integers(0, 1000))
def test_build_bwt_matches_rotation_sort(s, seed):
    o = shuffled_ordering(s, seed)
    out = build_bwt(s, o)
    assert list(out.bwt) == naive_bwt(Text.of(s).symbols, o)
    assert out.runs == runs_of(out.bwt)


@given(texts, st.integers(0, 1000))
def test_invert_round_trip(s, seed):
    o = shuffled_ordering(s, seed)
    assert str(invert_bwt(build_bwt(s, o), o)) == s


@given(texts, st.integers(0, 1000))
def test_lf_is_permutation(s, seed):
    out = build_bwt(s, shuffled_ordering(s, seed))
    assert sorted(out.lf) == list(range(len(s) + 1))


@given(st.lists(st.text(alphabet="ab", max_size=4), min_size=1, max_size=4), st.integers(0, 100))
@settings(max_examples=60)
def test_circular_matches_rotation_sort(strings, seed):
    syms = []
    for i, s in enumerate(strings):
        syms += [byte_symbol(c) for c in s] + [terminator(i)]
    terms = [terminator(i) for i in range(len(strings))]
    random.Random(seed).shuffle(terms)
    o = AlphabetOrdering((SENTINEL, *terms, *sorted({byte_symbol(c) for s in strings for c in s})))
    out = circular_bwt(syms, o)
    assert list(out.bwt) == naive_circular_bwt(syms, o)


def test_symbol_printing():
    assert str(byte_symbol(",")) == "\\x2c"
    assert str(byte_symbol("$")) == "\\x24"
    assert str(byte_symbol(0)) == "\\x00"
    assert str(terminator(3)) == "$3"
    assert str(regular(300)) == "#300"
    assert SENTINEL.kind is Kind.SENTINEL
