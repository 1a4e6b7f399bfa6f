"""Optimal ordering of per-string terminators (constrained alphabet ordering).

For a collection ``T_0 .. T_{d-1}`` the circular BWT of
``T_0 $_0 T_1 $_1 ... T_{d-1} $_{d-1}`` splits into blocks: rows whose right
context agrees up to the first terminator.  Inside a block the row order is
the terminator order restricted to the block's strings, so each block acts as
a tuple of freely arrangeable labels.  Maximising the label matches across
block boundaries is the tuple-ordering problem, solved by a forward marking
pass and a backward extraction.

Labels are plain ints: a regular symbol keeps its code (>= 0) and terminator
``$_k`` is stored as ``k - d`` so that terminators sort first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bwt_core import SENTINEL, AlphabetOrdering, Symbol, Text, regular, terminator
from .errors import InvalidInputError, InvariantViolation
from .ranking import rank_paths


@dataclass(frozen=True)
class StringCollection:
    strings: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.strings:
            raise InvalidInputError("a collection needs at least one string")
        for s in self.strings:
            if any(c < 0 for c in s):
                raise InvalidInputError("symbol codes must be non-negative")

    @classmethod
    def of(cls, strings: Iterable) -> "StringCollection":
        out = []
        for s in strings:
            if isinstance(s, str):
                s = s.encode("latin-1")
            out.append(tuple(s))
        return cls(tuple(out))

    @property
    def d(self) -> int:
        return len(self.strings)

    @property
    def N(self) -> int:
        return sum(map(len, self.strings))

    def alphabet(self) -> list[Symbol]:
        return [regular(c) for c in sorted({c for s in self.strings for c in s})]

    def text(self) -> Text:
        """``T_0 $_0 ... T_{d-1} $_{d-1}`` as a symbol text."""
        syms = []
        for i, s in enumerate(self.strings):
            syms.extend(regular(c) for c in s)
            syms.append(terminator(i))
        return Text(tuple(syms), frozenset(syms))


@dataclass(frozen=True)
class SpecialOrdering:
    """``pi[0] .. pi[d-1]``: string ids in increasing terminator rank."""

    pi: tuple[int, ...]

    def alphabet_ordering(self, collection: StringCollection) -> AlphabetOrdering:
        return AlphabetOrdering(
            (SENTINEL,) + tuple(terminator(i) for i in self.pi) + tuple(collection.alphabet())
        )


@dataclass(frozen=True)
class TupleArrangement:
    order: tuple[tuple[int, ...], ...]
    matches: int

    @property
    def runs(self) -> int:
        return sum(map(len, self.order)) - self.matches


def label_symbol(label: int, d: int) -> Symbol:
    return terminator(label + d) if label < 0 else regular(label)


def format_tuples(tuples: Sequence[Sequence[int]], d: int) -> str:
    """Render tuples like ``(0,1,2)($5)``; terminators print as ``$k``."""
    return "".join("(" + ",".join(str(label_symbol(x, d)) for x in t) + ")" for t in tuples)


class BlockTupleSequence:
    """Blocks of the circular BWT in row order, with their label tuples.

    Vertex ``p`` is a position of the concatenated text (terminators
    included); its block is the class of the suffix starting at ``p`` cut at
    the first terminator, and its label is the symbol before ``p``.
    """

    def __init__(self, collection: StringCollection):
        self.collection = collection
        d = collection.d
        lengths = np.fromiter((len(s) for s in collection.strings), dtype=np.int64, count=d)
        total = int(lengths.sum()) + d
        ends = np.cumsum(lengths + 1) - 1  # terminator positions
        starts = ends - lengths
        flat = np.fromiter((c for s in collection.strings for c in s), dtype=np.int64, count=int(lengths.sum()))
        is_term = np.zeros(total, dtype=bool)
        is_term[ends] = True
        codes = np.zeros(total, dtype=np.int64)
        codes[~is_term] = flat + 1
        nxt = np.arange(1, total + 1, dtype=np.int64)
        nxt[ends] = -1
        sid = np.repeat(np.arange(d, dtype=np.int64), lengths + 1)
        prev = np.roll(np.arange(total, dtype=np.int64), 1)
        # label: previous symbol cyclically; a terminator of string j reads as j - d
        label = np.where(is_term[prev], sid[prev] - d, codes[prev] - 1)

        self.rank = rank_paths(codes, nxt)
        self.sid = sid
        self.label = label
        self.starts = starts
        self.ends = ends
        self.flat_codes = codes
        order = np.lexsort((sid, self.rank))
        self.vertex_order = order
        r = self.rank[order]
        cut = np.flatnonzero(np.r_[True, r[1:] != r[:-1]])
        self.block_start = np.r_[cut, total]
        self.block_of = np.empty(total, dtype=np.int64)
        self.block_of[order] = np.cumsum(np.r_[0, (r[1:] != r[:-1]).astype(np.int64)])

    def __len__(self) -> int:
        return len(self.block_start) - 1

    @cached_property
    def tuples(self) -> list[tuple[int, ...]]:
        """Distinct labels of every block, in natural label order."""
        o = np.lexsort((self.label, self.block_of))
        b = self.block_of[o]
        lab = self.label[o]
        keep = np.r_[True, (b[1:] != b[:-1]) | (lab[1:] != lab[:-1])]
        b, lab = b[keep].tolist(), lab[keep].tolist()
        out: list[list[int]] = [[] for _ in range(len(self))]
        for bi, x in zip(b, lab):
            out[bi].append(x)
        return [tuple(t) for t in out]

    def members(self, block: int) -> list[tuple[int, int]]:
        """``(string id, label)`` pairs of a block, by string id."""
        vs = self.vertex_order[self.block_start[block]:self.block_start[block + 1]]
        return [(int(self.sid[v]), int(self.label[v])) for v in vs]

    def key(self, block: int) -> tuple[int, ...]:
        """The block's context: the suffix (up to its terminator) shared by its rows."""
        p = int(self.vertex_order[self.block_start[block]])
        end = int(self.ends[self.sid[p]])
        return tuple(int(c) - 1 for c in self.flat_codes[p:end])

    def children(self) -> list[dict[int, int]]:
        """Per block, regular label -> block reached by stepping one symbol left."""
        kids: list[dict[int, int]] = [dict() for _ in range(len(self))]
        has_child = self.label >= 0
        vs = np.flatnonzero(has_child)
        src = self.block_of[vs].tolist()
        dst = self.block_of[vs - 1].tolist()
        for b, x, c in zip(src, self.label[vs].tolist(), dst):
            kids[b][x] = c
        return kids

    def labels_in_row_order(self) -> np.ndarray:
        """Circular BWT under the identity terminator order (``$_0 < $_1 < ...``)."""
        return self.label[self.vertex_order]


def build_blocks(collection: StringCollection | Iterable) -> BlockTupleSequence:
    if not isinstance(collection, StringCollection):
        collection = StringCollection.of(collection)
    return BlockTupleSequence(collection)


def greedy_tuple_order(tuples: Sequence[Sequence[int]]) -> TupleArrangement:
    """Arrange each tuple to maximise matches between neighbouring tuples.

    Forward pass marks, per tuple, the elements that may start (``L``) or end
    (``R``) it in some optimal arrangement of the prefix; the backward pass
    picks concrete ends, preferring the smallest label on ties.
    """
    q = len(tuples)
    if q == 0:
        return TupleArrangement((), 0)
    left_marks: list[set] = []
    right_marks: list[set] = []
    prev_r: set | None = None
    for t in tuples:
        if not t:
            raise InvalidInputError("tuples must be non-empty")
        if prev_r is None:
            lm = set(t)
        else:
            lm = {x for x in t if x in prev_r} or set(t)
        if len(t) == 1:
            rm = lm
        elif len(lm) >= 2:
            rm = set(t)
        else:
            rm = set(t) - lm
        left_marks.append(lm)
        right_marks.append(rm)
        prev_r = rm

    order: list[tuple[int, ...]] = [()] * q
    nxt_left = None
    for i in range(q - 1, -1, -1):
        t = tuples[i]
        rm = right_marks[i]
        r = nxt_left if nxt_left in rm else min(rm)
        if len(t) == 1:
            order[i] = (r,)
            nxt_left = r
            continue
        cands = [x for x in left_marks[i] if x != r]
        if not cands:
            raise InvariantViolation("marking left no distinct left element")
        left = min(cands)
        order[i] = (left, *sorted(x for x in t if x != left and x != r), r)
        nxt_left = left
    matches = sum(1 for i in range(q - 1) if order[i][-1] == order[i + 1][0])
    return TupleArrangement(tuple(order), matches)


def reconstruct_pi(blocks: BlockTupleSequence, arrangement: TupleArrangement) -> SpecialOrdering:
    """Terminator order realising ``arrangement`` in every block.

    Walks the block tree from the root, visiting label groups in arranged
    order; a terminator label ``$_k`` closes string ``k + 1 (mod d)``.
    """
    d = blocks.collection.d
    if len(arrangement.order) != len(blocks):
        raise InvariantViolation("arrangement does not match the block sequence")
    kids = blocks.children()
    pi: list[int] = []
    stack: list[tuple[bool, int]] = [(False, 0)]
    while stack:
        is_leaf, x = stack.pop()
        if is_leaf:
            pi.append(x)
            continue
        for label in reversed(arrangement.order[x]):
            if label < 0:
                stack.append((True, (label + d + 1) % d))
            else:
                try:
                    stack.append((False, kids[x][label]))
                except KeyError:
                    raise InvariantViolation(f"block {x} has no child for label {label}") from None
    if sorted(pi) != list(range(d)):
        raise InvariantViolation("reconstructed order is not a permutation")
    return SpecialOrdering(tuple(pi))


def solve_cao(collection: StringCollection | Iterable) -> tuple[SpecialOrdering, int]:
    """Terminator order minimising the circular BWT run count, and that count."""
    blocks = build_blocks(collection)
    arrangement = greedy_tuple_order(blocks.tuples)
    return reconstruct_pi(blocks, arrangement), arrangement.runs


def separation_family(n: int, sigma: int = 2) -> StringCollection:
    """All ``sigma**n`` strings of length ``n`` over the digits, lexicographically."""
    if not 1 <= sigma <= 10:
        raise InvalidInputError("sigma must be between 1 and 10")
    strings = []
    for k in range(sigma ** n):
        digits = []
        for _ in range(n):
            k, r = divmod(k, sigma)
            digits.append(48 + r)
        strings.append(tuple(reversed(digits)))
    return StringCollection(tuple(strings))
