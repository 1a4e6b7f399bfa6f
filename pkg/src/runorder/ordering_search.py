"""Search for alphabet orderings that minimise the BWT run count.

Admissible orderings keep the sentinel first and every special terminator
ahead of every regular symbol.  ``exact_search`` enumerates all of them;
``local_search`` hill-climbs over adjacent transpositions.
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .bwt_core import SENTINEL, AlphabetOrdering, Kind, Text, count_runs
from .errors import LimitExceededError
from .ranking import suffix_array

DEFAULT_LIMIT = 10


@dataclass(frozen=True)
class SearchResult:
    ordering: AlphabetOrdering
    runs: int
    method: str  # "exact" | "local" | "sample"
    explored: int
    elapsed: float  # seconds


@dataclass(frozen=True)
class RatioReport:
    min_runs: int
    max_runs: int
    ratio: Fraction
    log2n_reference: float
    explored: int
    # 2*rho(T)+2; a reported diagnostic only, never asserted
    doubling_bound: int


class _Evaluator:
    """Run counts of one text under many orderings, without rebuilding Text objects."""

    def __init__(self, text: Text):
        self.terms = sorted(s for s in text.alphabet if s.kind is Kind.TERMINATOR)
        self.regs = sorted(s for s in text.alphabet if s.kind is Kind.REGULAR)
        self.natural = self.terms + self.regs
        index = {s: i for i, s in enumerate(self.natural)}
        self.codes = np.array([index[s] for s in text.symbols] + [-1], dtype=np.int64)

    def runs(self, order: Sequence[int]) -> int:
        """``order`` lists natural-symbol indices from rank 1 upwards."""
        lookup = np.empty(len(self.natural) + 1, dtype=np.int64)
        lookup[np.asarray(order, dtype=np.int64)] = np.arange(1, len(order) + 1)
        lookup[-1] = 0  # index -1 is the sentinel
        ranked = lookup[self.codes]
        sa = suffix_array(ranked)
        return count_runs(ranked[sa - 1])

    def rank_vector(self, order: Sequence[int]) -> tuple[int, ...]:
        vec = [0] * len(order)
        for r, i in enumerate(order, start=1):
            vec[i] = r
        return (0, *vec)

    def ordering(self, order: Sequence[int]) -> AlphabetOrdering:
        return AlphabetOrdering((SENTINEL,) + tuple(self.natural[i] for i in order))

    def admissible(self, first: int | None = None) -> Iterator[tuple[int, ...]]:
        nt = len(self.terms)
        term_idx = list(range(nt))
        reg_idx = list(range(nt, len(self.natural)))
        head = term_idx if nt else reg_idx
        tail_fixed = reg_idx if nt else []
        heads = [first] if first is not None else head
        for h in heads:
            rest = [i for i in head if i != h]
            for p in permutations(rest):
                if nt:
                    for q in permutations(tail_fixed):
                        yield (h, *p, *q)
                else:
                    yield (h, *p)

    def first_choices(self) -> list[int]:
        return list(range(len(self.terms))) if self.terms else list(range(len(self.natural)))

    def ordering_index(self, ordering: AlphabetOrdering) -> tuple[int, ...]:
        index = {s: i for i, s in enumerate(self.natural)}
        return tuple(index[s] for s in ordering.symbols[1:] if s in index)


def admissible_count(text: Text) -> int:
    nt = sum(1 for s in text.alphabet if s.kind is Kind.TERMINATOR)
    return math.factorial(nt) * math.factorial(len(text.alphabet) - nt)


def _best_in_partition(text: Text, first: int | None) -> tuple[int, tuple[int, ...], tuple[int, ...], int]:
    ev = _Evaluator(text)
    best = None
    explored = 0
    for order in ev.admissible(first):
        explored += 1
        key = (ev.runs(order), ev.rank_vector(order), order)
        if best is None or key[:2] < best[:2]:
            best = key
    if best is None:  # empty alphabet: the only ordering is the sentinel alone
        best = (ev.runs(()), (0,), ())
    return (*best, explored)


def exact_search(text, limit: int = DEFAULT_LIMIT, threads: int = 1) -> SearchResult:
    """Global minimum over all admissible orderings.

    Ties go to the lexicographically smallest rank vector.  With
    ``threads > 1`` the ordering space is split by its first free symbol and
    the partial optima are reduced with the same key, so the answer matches
    the sequential one.
    """
    text = Text.of(text)
    if len(text.alphabet) > limit:
        raise LimitExceededError(
            f"alphabet has {len(text.alphabet)} symbols (limit {limit}); use local_search instead"
        )
    start = time.perf_counter()
    ev = _Evaluator(text)
    parts = ev.first_choices() or [None]
    if threads > 1 and len(parts) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_best_in_partition, [text] * len(parts), parts))
    else:
        results = [_best_in_partition(text, p) for p in parts]
    runs, _, order, _ = min(results, key=lambda r: (r[0], r[1]))
    explored = sum(r[3] for r in results)
    return SearchResult(ev.ordering(order), runs, "exact", explored, time.perf_counter() - start)


def _neighbours(ev: _Evaluator, order: tuple[int, ...]) -> list[tuple[int, ...]]:
    nt = len(ev.terms)
    out = []
    for k in range(len(order) - 1):
        if k == nt - 1:  # never move a terminator past a regular symbol
            continue
        o = list(order)
        o[k], o[k + 1] = o[k + 1], o[k]
        out.append(tuple(o))
    return out


def _random_admissible(ev: _Evaluator, rng: random.Random) -> tuple[int, ...]:
    nt = len(ev.terms)
    t = list(range(nt))
    r = list(range(nt, len(ev.natural)))
    rng.shuffle(t)
    rng.shuffle(r)
    return tuple(t + r)


def local_search(text, seed: AlphabetOrdering | None = None, budget: int = 1000, rng_seed: int = 0) -> SearchResult:
    """First-improvement hill climbing over adjacent-rank transpositions.

    ``budget`` bounds the number of orderings evaluated after the seed.  On a
    local minimum the climb restarts from a random admissible ordering; the
    best ordering seen is returned, so the result never exceeds the seed.
    """
    text = Text.of(text)
    start = time.perf_counter()
    ev = _Evaluator(text)
    if seed is None:
        seed = AlphabetOrdering.standard(text.alphabet)
    rng = random.Random(rng_seed)
    current = ev.ordering_index(seed)
    cur_runs = ev.runs(current)
    best, best_runs = current, cur_runs
    evals = 0
    while evals < budget:
        moves = _neighbours(ev, current)
        rng.shuffle(moves)
        improved = False
        for cand in moves:
            if evals >= budget:
                break
            r = ev.runs(cand)
            evals += 1
            if r < cur_runs:
                current, cur_runs, improved = cand, r, True
                break
        if cur_runs < best_runs:
            best, best_runs = current, cur_runs
        if not improved and evals < budget:
            if not moves:
                break
            current = _random_admissible(ev, rng)
            cur_runs = ev.runs(current)
            evals += 1
            if cur_runs < best_runs:
                best, best_runs = current, cur_runs
    # keep the caller's seed ordering object when nothing better was found
    ordering = seed if best == ev.ordering_index(seed) else ev.ordering(best)
    return SearchResult(ordering, best_runs, "local", evals, time.perf_counter() - start)


def ratio_report(text, mode: str = "exhaustive", samples: int = 1000, rng_seed: int = 0,
                 limit: int = DEFAULT_LIMIT) -> RatioReport:
    """Spread of run counts across orderings, next to the log^2 n reference.

    ``mode='exhaustive'`` visits every admissible ordering (subject to
    ``limit``); ``mode='sampled'`` draws ``samples`` random admissible ones.
    """
    text = Text.of(text)
    ev = _Evaluator(text)
    if mode == "exhaustive":
        if len(text.alphabet) > limit:
            raise LimitExceededError(f"alphabet has {len(text.alphabet)} symbols (limit {limit})")
        orders = ev.admissible()
    elif mode == "sampled":
        rng = random.Random(rng_seed)
        orders = (_random_admissible(ev, rng) for _ in range(samples))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lo = hi = None
    explored = 0
    for order in orders:
        r = ev.runs(order)
        explored += 1
        lo = r if lo is None else min(lo, r)
        hi = r if hi is None else max(hi, r)
    n = len(text) + 1
    return RatioReport(lo, hi, Fraction(hi, lo), math.log2(n) ** 2, explored,
                       2 * count_runs(text.symbols) + 2)

