"""BWT construction under arbitrary alphabet orderings.

Symbols carry a kind (sentinel, special terminator, regular) and an integer
code.  An :class:`AlphabetOrdering` is the total order used when sorting the
rotations; the sentinel always has rank 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from itertools import groupby
from typing import Iterable, Sequence

import numpy as np

from .errors import AlphabetMismatchError, InvalidInputError, MalformedBwtError
from .ranking import suffix_array


class Kind(enum.IntEnum):
    SENTINEL = 0
    TERMINATOR = 1
    REGULAR = 2


_PLAIN = frozenset(chr(c) for c in range(0x21, 0x7F)) - set("$,\\")


def escape_byte(code: int) -> str:
    ch = chr(code)
    return ch if ch in _PLAIN else f"\\x{code:02x}"


@dataclass(frozen=True, order=True)
class Symbol:
    """An alphabet symbol.  The natural order is sentinel < terminators < regulars."""

    kind: Kind
    code: int
    name: str = field(default="", compare=False, repr=False)

    def __str__(self) -> str:
        if self.name:
            return self.name
        if self.kind is Kind.SENTINEL:
            return "$"
        if self.kind is Kind.TERMINATOR:
            return f"${self.code}"
        return escape_byte(self.code) if self.code < 256 else f"#{self.code}"

    def __repr__(self) -> str:
        return f"Symbol({self})"


SENTINEL = Symbol(Kind.SENTINEL, 0, "$")


def terminator(k: int) -> Symbol:
    return Symbol(Kind.TERMINATOR, k, f"${k}")


def regular(code: int, name: str = "") -> Symbol:
    return Symbol(Kind.REGULAR, code, name)


def byte_symbol(ch: str | int) -> Symbol:
    code = ord(ch) if isinstance(ch, str) else ch
    if not 0 <= code < 256:
        raise InvalidInputError(f"not a byte: {ch!r}")
    return Symbol(Kind.REGULAR, code)


def as_symbols(text: str | bytes | Iterable) -> tuple[Symbol, ...]:
    if isinstance(text, str):
        text = text.encode("latin-1")
    if isinstance(text, (bytes, bytearray)):
        return tuple(Symbol(Kind.REGULAR, b) for b in text)
    return tuple(s if isinstance(s, Symbol) else byte_symbol(s) for s in text)


@dataclass(frozen=True)
class Text:
    symbols: tuple[Symbol, ...]
    alphabet: frozenset[Symbol]

    def __post_init__(self):
        seen_terms = set()
        for s in self.symbols:
            if s.kind is Kind.SENTINEL:
                raise InvalidInputError("the sentinel is appended by build_bwt; it may not occur in a text")
            if s.kind is Kind.TERMINATOR:
                if s in seen_terms:
                    raise InvalidInputError(f"terminator {s} occurs more than once")
                seen_terms.add(s)
            if s not in self.alphabet:
                raise AlphabetMismatchError(f"symbol {s} is not in the declared alphabet")
        if SENTINEL in self.alphabet:
            raise InvalidInputError("the sentinel may not be declared in a text alphabet")

    @classmethod
    def of(cls, text, alphabet: Iterable[Symbol] | None = None) -> "Text":
        if isinstance(text, Text):
            return text
        symbols = as_symbols(text)
        return cls(symbols, frozenset(symbols) if alphabet is None else frozenset(alphabet))

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(map(str, self.symbols))


@dataclass(frozen=True)
class AlphabetOrdering:
    """Total order over an alphabet; ``symbols[k]`` has rank ``k``."""

    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        if not self.symbols or self.symbols[0] != SENTINEL:
            raise InvalidInputError("the sentinel must have rank 0")
        if len(set(self.symbols)) != len(self.symbols):
            dup = next(s for s in self.symbols if self.symbols.count(s) > 1)
            raise InvalidInputError(f"duplicate symbol {dup} in ordering")
        kinds = [s.kind for s in self.symbols[1:]]
        if Kind.SENTINEL in kinds:
            raise InvalidInputError("duplicate sentinel in ordering")
        if kinds != sorted(kinds):
            raise InvalidInputError("special terminators must rank below every regular symbol")

    @classmethod
    def standard(cls, alphabet: Iterable[Symbol]) -> "AlphabetOrdering":
        return cls((SENTINEL,) + tuple(sorted(set(alphabet) - {SENTINEL})))

    @classmethod
    def of(cls, symbols: Iterable) -> "AlphabetOrdering":
        """Build from symbols or 1-char strings; prepends the sentinel when absent."""
        syms = []
        for s in symbols:
            if isinstance(s, Symbol):
                syms.append(s)
            elif s == "$":
                syms.append(SENTINEL)
            else:
                syms.append(byte_symbol(s))
        if not syms or syms[0] != SENTINEL:
            syms.insert(0, SENTINEL)
        return cls(tuple(syms))

    @cached_property
    def rank(self) -> dict[Symbol, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def rank_vector(self) -> tuple[int, ...]:
        """Ranks listed in natural symbol order; the search tie-break key."""
        return tuple(self.rank[s] for s in sorted(self.symbols))

    def restricted(self, keep) -> "AlphabetOrdering":
        keep = set(keep) | {SENTINEL}
        return AlphabetOrdering(tuple(s for s in self.symbols if s in keep))

    def __str__(self) -> str:
        return ",".join(map(str, self.symbols))


@dataclass(frozen=True)
class BwtOutput:
    bwt: tuple[Symbol, ...]
    runs: int
    lf: tuple[int, ...]

    def __str__(self) -> str:
        return "".join(map(str, self.bwt))


def count_runs(s: Sequence) -> int:
    """Number of maximal unary blocks of ``s``."""
    if isinstance(s, np.ndarray):
        return int(len(s) and 1 + np.count_nonzero(s[1:] != s[:-1]))
    return sum(1 for _ in groupby(s))


def _lf_from_codes(codes: np.ndarray) -> np.ndarray:
    # j-th occurrence of c in L maps to j-th occurrence of c in F
    order = np.argsort(codes, kind="stable")
    lf = np.empty(len(codes), dtype=np.int64)
    lf[order] = np.arange(len(codes))
    return lf


def _encode(symbols: Sequence[Symbol], ordering: AlphabetOrdering) -> list[int]:
    rank = ordering.rank
    try:
        return [rank[s] for s in symbols]
    except KeyError as exc:
        raise AlphabetMismatchError(f"symbol {exc.args[0]} is not covered by the ordering") from None


def _resolve(text, ordering) -> tuple[Text, AlphabetOrdering]:
    text = Text.of(text)
    if ordering is None:
        ordering = AlphabetOrdering.standard(text.alphabet)
    elif not isinstance(ordering, AlphabetOrdering):
        ordering = AlphabetOrdering.of(ordering)
    missing = text.alphabet - set(ordering.symbols)
    if missing:
        raise AlphabetMismatchError(f"ordering does not cover {sorted(missing)}")
    return text, ordering


def _transform(codes: list[int], ordering: AlphabetOrdering) -> BwtOutput:
    arr = np.asarray(codes, dtype=np.int64)
    sa = suffix_array(arr)
    last = arr[sa - 1]  # sa == 0 wraps to the final symbol
    bwt = tuple(ordering.symbols[c] for c in last.tolist())
    return BwtOutput(bwt, count_runs(last), tuple(_lf_from_codes(last).tolist()))


def build_bwt(text, ordering: AlphabetOrdering | Iterable | None = None) -> BwtOutput:
    """BWT of ``text`` followed by the sentinel, rotations sorted by ``ordering``.

    ``text`` may be a :class:`Text`, ``str``/``bytes`` or a symbol sequence;
    ``ordering`` defaults to the natural order of the text's alphabet.
    """
    text, ordering = _resolve(text, ordering)
    return _transform(_encode(text.symbols, ordering) + [0], ordering)


def circular_bwt(text, ordering: AlphabetOrdering | Iterable | None = None) -> BwtOutput:
    """BWT of the rotations of ``text`` itself, with no sentinel appended.

    The last symbol must be unique in the text (typically a special
    terminator), which makes every rotation distinct and lets suffix order
    stand in for rotation order.
    """
    text, ordering = _resolve(text, ordering)
    if not text.symbols:
        raise InvalidInputError("empty text")
    if text.symbols.count(text.symbols[-1]) != 1:
        raise InvalidInputError("circular BWT needs a text whose last symbol is unique")
    return _transform(_encode(text.symbols, ordering), ordering)


def lf_path(b: BwtOutput) -> tuple[Symbol, ...]:
    """L-column labels met while following LF from row 0."""
    out = []
    row = 0
    for _ in range(len(b.bwt)):
        out.append(b.bwt[row])
        row = b.lf[row]
    return tuple(out)


def invert_bwt(b: BwtOutput | Sequence[Symbol], ordering: AlphabetOrdering | Iterable | None = None) -> Text:
    if isinstance(b, BwtOutput):
        bwt = b.bwt
    elif isinstance(b, str):
        # in plain strings '$' denotes the sentinel
        bwt = tuple(SENTINEL if ch == "$" else byte_symbol(ch) for ch in b)
    else:
        bwt = tuple(b)
    n_sent = sum(1 for s in bwt if s == SENTINEL)
    if n_sent != 1:
        raise MalformedBwtError(f"expected exactly one sentinel, found {n_sent}")
    alphabet = set(bwt) - {SENTINEL}
    if ordering is None:
        ordering = AlphabetOrdering.standard(alphabet)
    elif not isinstance(ordering, AlphabetOrdering):
        ordering = AlphabetOrdering.of(ordering)
    codes = np.asarray(_encode(bwt, ordering), dtype=np.int64)
    lf = _lf_from_codes(codes)
    out = []
    row = 0
    for _ in range(len(bwt) - 1):
        sym = bwt[row]
        if sym == SENTINEL:
            raise MalformedBwtError("LF cycle closes before visiting every row")
        out.append(sym)
        row = lf[row]
    if bwt[row] != SENTINEL:
        raise MalformedBwtError("LF walk does not end at the sentinel")
    out.reverse()
    return Text(tuple(out), frozenset(set(ordering.symbols) - {SENTINEL}))
