"""Reduction chain from (1,2)-TSP Path to column ordering to alphabet ordering.

Phase 1 turns a graph's unit edges into a binary matrix whose row-major
linearisation, under a column order, has a run count tied to the number of
graph edges that the order places side by side.  Phase 2 encodes the matrix
as a text whose BWT simulates that linearisation inside its 0-block.

Column layout of a graph gadget: column 0 is ``c_s``, columns ``1..n`` are the
vertices, column ``n + 1`` is ``c_t``.  Rows are 0-based here; a 1 in row
``r`` is emitted with ``r + 2`` zeros.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .bwt_core import SENTINEL, AlphabetOrdering, Symbol, Text, byte_symbol, circular_bwt, count_runs, regular, terminator
from .errors import InvalidInputError, LimitExceededError, PreconditionError

ZERO, ONE, TWO = byte_symbol("0"), byte_symbol("1"), byte_symbol("2")


def column_symbol(j: int) -> Symbol:
    """Symbol ``C{j+1}`` for 0-based column ``j``."""
    return regular(256 + j + 1, f"C{j + 1}")


@dataclass(frozen=True)
class TspInstance:
    n_vertices: int
    unit_edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.unit_edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidInputError(f"edge ({u}, {v}) leaves the vertex range")
            if u == v:
                raise InvalidInputError(f"self-loop at {u}")
            key = frozenset((u, v))
            if key in seen:
                raise InvalidInputError(f"duplicate edge ({u}, {v})")
            seen.add(key)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n_vertices: int | None = None) -> "TspInstance":
        edges = tuple((int(u), int(v)) for u, v in edges)
        if n_vertices is None:
            n_vertices = 1 + max((max(e) for e in edges), default=-1)
        return cls(n_vertices, edges)

    @property
    def m(self) -> int:
        return len(self.unit_edges)

    def weight(self, u: int, v: int) -> int:
        return 1 if (u, v) in self._edge_set else 2

    @property
    def _edge_set(self) -> set[tuple[int, int]]:
        s = set(self.unit_edges)
        return s | {(v, u) for u, v in s}

    def path_weight(self, order: Sequence[int]) -> int:
        es = self._edge_set
        return sum(1 if (a, b) in es else 2 for a, b in zip(order, order[1:]))


def tsp_optimum(g: TspInstance, limit: int = 9) -> tuple[tuple[int, ...], int]:
    """Cheapest Hamiltonian path by enumeration (first optimum in lexicographic order)."""
    if g.n_vertices > limit:
        raise LimitExceededError(f"{g.n_vertices} vertices exceeds the enumeration limit {limit}")
    best = None
    for order in permutations(range(g.n_vertices)):
        w = g.path_weight(order)
        if best is None or w < best[1]:
            best = (order, w)
    return best


@dataclass(frozen=True, eq=False)
class IncidenceGadget:
    matrix: np.ndarray
    m: int = 0
    ell: int = 0
    n_vertices: int | None = None
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.int8)
        if mat.ndim != 2 or not np.isin(mat, (0, 1)).all():
            raise InvalidInputError("matrix must be a 2-D 0/1 array")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[int]]) -> "IncidenceGadget":
        """A raw matrix with no column roles (no ``c_s``/``c_t``)."""
        return cls(np.array(rows, dtype=np.int8))

    @property
    def has_roles(self) -> bool:
        return self.n_vertices is not None

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def cs(self) -> int:
        return 0

    @property
    def ct(self) -> int:
        return self.n_cols - 1

    @property
    def nonstandard_ell(self) -> bool:
        return self.has_roles and self.ell != 4 * self.m

    def column_names(self) -> list[str]:
        return [str(column_symbol(j)) for j in range(self.n_cols)]


def build_gadget_matrix(g: TspInstance, ell: int | None = None) -> IncidenceGadget:
    """Edge rows (input order), then ``2*ell`` rows alternating ``c_t``, ``c_s``."""
    if g.m < 1:
        raise InvalidInputError("the graph needs at least one unit edge")
    if ell is None:
        ell = 4 * g.m
    if ell < 1:
        raise InvalidInputError("ell must be positive")
    n = g.n_vertices
    mat = np.zeros((g.m + 2 * ell, n + 2), dtype=np.int8)
    for r, (u, v) in enumerate(g.unit_edges):
        mat[r, u + 1] = mat[r, v + 1] = 1
    for k in range(2 * ell):
        mat[g.m + k, n + 1 if k % 2 == 0 else 0] = 1
    return IncidenceGadget(mat, g.m, ell, n, g.unit_edges)


def linearize(gad: IncidenceGadget, pi: Sequence[int]) -> np.ndarray:
    return gad.matrix[:, list(pi)].ravel()


def co_runs(gad: IncidenceGadget, pi: Sequence[int]) -> int:
    return count_runs(linearize(gad, pi))


def co_runs_all(gad: IncidenceGadget, perms: np.ndarray) -> np.ndarray:
    """Linearisation run counts for a batch of column orders (one per row)."""
    perms = np.asarray(perms, dtype=np.int64)
    lin = gad.matrix[:, perms].transpose(1, 0, 2).reshape(len(perms), -1)
    return 1 + np.count_nonzero(lin[:, 1:] != lin[:, :-1], axis=1)


def count_m1(gad: IncidenceGadget, pi: Sequence[int]) -> int:
    """Edge rows whose two 1-columns sit next to each other under ``pi``."""
    pos = {c: i for i, c in enumerate(pi)}
    return sum(1 for u, v in gad.edges if abs(pos[u + 1] - pos[v + 1]) == 1)


def is_extremal(gad: IncidenceGadget, pi: Sequence[int]) -> bool:
    return pi[0] == gad.cs and pi[-1] == gad.ct


def is_swapped(gad: IncidenceGadget, pi: Sequence[int]) -> bool:
    return pi[0] == gad.ct and pi[-1] == gad.cs


def closed_form_runs(gad: IncidenceGadget, m1: int) -> int:
    return 2 * m1 + 4 * (gad.m - m1) + 2 * gad.ell + 1


@dataclass
class ReductionReport:
    m1: int
    co_runs: int
    tsp_cost: int
    ao_runs: int | None = None
    r0: int | None = None
    condition_i: bool | None = None
    condition_ii: bool | None = None
    alpha: int | None = None
    beta_phase1: Fraction = Fraction(1, 2)
    beta_phase2: Fraction = Fraction(1)
    closed_form: int | None = None
    flags: list[str] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)


def extract_tsp_solution(gad: IncidenceGadget, pi: Sequence[int]) -> tuple[list[list[int]], int, list[int]]:
    """Paths induced by adjacent edge columns, their nominal TSP cost, and the joined path.

    The cost charges every connector 2, as the reduction does; the joined
    path's true weight can only be lower.
    """
    es = {frozenset(e) for e in gad.edges}
    paths: list[list[int]] = []
    prev = None
    for c in pi:
        if c in (gad.cs, gad.ct):
            prev = None
            continue
        v = c - 1
        if prev is not None and frozenset((prev, v)) in es:
            paths[-1].append(v)
        else:
            paths.append([v])
        prev = v
    m1 = sum(len(p) - 1 for p in paths)
    n = gad.n_vertices
    return paths, m1 + 2 * (n - 1 - m1), [v for p in paths for v in p]


def linearize_and_cost(gad: IncidenceGadget, pi: Sequence[int]) -> ReductionReport:
    runs = co_runs(gad, pi)
    if not gad.has_roles:
        return ReductionReport(0, runs, 0)
    _, cost, _ = extract_tsp_solution(gad, pi)
    m1 = count_m1(gad, pi)
    rep = ReductionReport(m1, runs, cost)
    if is_extremal(gad, pi):
        rep.closed_form = closed_form_runs(gad, m1)
    if gad.nonstandard_ell:
        rep.flags.append("nonstandard-ell")
    return rep


# -- phase 2 -----------------------------------------------------------------

@dataclass(frozen=True)
class AoInstance:
    text: Text
    # (row, column) per substring; row is None for a column's all-zero substring
    provenance: tuple[tuple[int | None, int], ...]

    @property
    def sigma(self) -> int:
        return len(self.text.alphabet)

    def substrings(self) -> list[tuple[Symbol, ...]]:
        out, cur = [], []
        for s in self.text.symbols:
            cur.append(s)
            if s.kind.name == "TERMINATOR":
                out.append(tuple(cur))
                cur = []
        return out


def build_ao_string(gad: IncidenceGadget) -> AoInstance:
    """Substrings ``1 0^(r+2) 2 C_j $_k`` per matrix 1, then ``0^(rows+2) 2 C_j $_k`` per column."""
    syms: list[Symbol] = []
    prov: list[tuple[int | None, int]] = []
    k = 0

    def emit(body: list[Symbol], origin):
        nonlocal k
        k += 1
        syms.extend(body)
        syms.append(terminator(k))
        prov.append(origin)

    rows, cols = gad.matrix.shape
    for r in range(rows):
        for j in range(cols):
            if gad.matrix[r, j]:
                emit([ONE] + [ZERO] * (r + 2) + [TWO, column_symbol(j)], (r, j))
    for j in range(cols):
        emit([ZERO] * (rows + 2) + [TWO, column_symbol(j)], (None, j))
    return AoInstance(Text(tuple(syms), frozenset(syms)), tuple(prov))


def _thread_arrangement(gad: IncidenceGadget, pi_c: Sequence[int], ao: AoInstance) -> list[int]:
    """Terminator order: columns in ``pi_c`` order; inside a column, threads whose 1
    closes a run of 1s come first (shallow to deep), threads whose 1 opens a run
    come last (deep to shallow), the rest in between."""
    rows, cols = gad.matrix.shape
    sub_of = {origin: i for i, origin in enumerate(ao.provenance)}
    lin = linearize(gad, pi_c)
    opens, closes = set(), set()
    i = 0
    while i < len(lin):
        if lin[i] == 1:
            j = i
            while j + 1 < len(lin) and lin[j + 1] == 1:
                j += 1
            if j > i:
                r0, p0 = divmod(i, cols)
                r1, p1 = divmod(j, cols)
                opens.add(sub_of[(r0, pi_c[p0])])
                closes.add(sub_of[(r1, pi_c[p1])])
            i = j + 1
        else:
            i += 1
    depth = {s: (rows if origin[0] is None else origin[0]) for s, origin in enumerate(ao.provenance)}
    order: list[int] = []
    for c in pi_c:
        threads = [s for s, origin in enumerate(ao.provenance) if origin[1] == c]
        first = sorted((s for s in threads if s in closes and s not in opens), key=depth.get)
        last = sorted((s for s in threads if s in opens and s not in closes), key=depth.get, reverse=True)
        middle = sorted((s for s in threads if s not in first and s not in last), key=depth.get)
        order.extend(first + middle + last)
    return order


def _template(gad: IncidenceGadget, pi_c: Sequence[int], dollar_order: Sequence[int]) -> AlphabetOrdering:
    return AlphabetOrdering(
        (SENTINEL,)
        + tuple(terminator(s + 1) for s in dollar_order)
        + (ONE, TWO, ZERO)
        + tuple(column_symbol(c) for c in pi_c)
    )


def canonical_alphabet_order(gad: IncidenceGadget, pi_c: Sequence[int],
                             ao: AoInstance | None = None) -> tuple[AlphabetOrdering, int]:
    """Ordering ``[$..., 1, 2, 0, C_pi...]`` simulating ``L(M_pi)`` in the 0-block.

    Returns the ordering and ``r0 = rho(L(M_pi)) - 1``; the circular BWT run
    count under it is ``r0 + sigma - 1`` for graph gadgets.
    """
    pi_c = list(pi_c)
    if sorted(pi_c) != list(range(gad.n_cols)):
        raise InvalidInputError("pi_c must be a permutation of the columns")
    if gad.has_roles and not is_extremal(gad, pi_c):
        raise PreconditionError("pi_c must place c_s first and c_t last")
    ao = ao or build_ao_string(gad)
    ordering = _template(gad, pi_c, _thread_arrangement(gad, pi_c, ao))
    return ordering, co_runs(gad, pi_c) - 1


def extract_column_order(ordering: AlphabetOrdering, n_cols: int) -> list[int]:
    rank = ordering.rank
    return sorted(range(n_cols), key=lambda j: rank[column_symbol(j)])


def ao_runs(ao: AoInstance, ordering: AlphabetOrdering) -> int:
    return circular_bwt(ao.text, ordering).runs


def search_terminator_order(gad: IncidenceGadget, pi_c: Sequence[int], mode: str = "all",
                            limit: int = 50_000, ao: AoInstance | None = None) -> tuple[int, int]:
    """Brute-force the terminator sub-order with the rest of the template fixed.

    ``mode='all'`` permutes every terminator; ``mode='bundles'`` keeps columns
    grouped in ``pi_c`` order and permutes threads within each column.
    Returns ``(minimum runs, orderings evaluated)``.
    """
    ao = ao or build_ao_string(gad)
    n_sub = len(ao.provenance)
    if mode == "all":
        count = math.factorial(n_sub)
        if count > limit:
            raise LimitExceededError(f"{count} terminator orders exceed the limit {limit}")
        candidates = permutations(range(n_sub))
    elif mode == "bundles":
        groups = [[s for s, o in enumerate(ao.provenance) if o[1] == c] for c in pi_c]
        count = math.prod(math.factorial(len(g)) for g in groups)
        if count > limit:
            raise LimitExceededError(f"{count} terminator orders exceed the limit {limit}")
        candidates = _product_of_perms(groups)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best = None
    n = 0
    for order in candidates:
        n += 1
        r = ao_runs(ao, _template(gad, pi_c, order))
        best = r if best is None else min(best, r)
    return best, n


def _product_of_perms(groups):
    if not groups:
        yield ()
        return
    for head in permutations(groups[0]):
        for tail in _product_of_perms(groups[1:]):
            yield head + tail


# -- L-reduction checks ------------------------------------------------------

def verify_l_reduction(g: TspInstance, samples: Iterable[Sequence[int]] | None = None, ell: int | None = None,
                       phase2_samples: int = 3, rng_seed: int = 0) -> ReductionReport:
    """Check both L-reduction conditions on a small instance.

    Phase 1 optima come from enumerating every column order; ``samples``
    (default: all column orders) are the CO solutions fed to condition (ii).
    Phase 2 is checked on the canonical orderings of the CO optimum plus
    ``phase2_samples`` random extremal column orders; the AO optimum used there
    is the best canonical value found, an upper bound on the true optimum,
    which only makes both checks stricter.
    """
    gad = build_gadget_matrix(g, ell)
    n, m = g.n_vertices, g.m
    cols = gad.n_cols
    all_perms = np.array(list(permutations(range(cols))), dtype=np.int64)
    runs = co_runs_all(gad, all_perms)
    best_idx = int(np.argmin(runs))
    opt_co = int(runs[best_idx])
    pi_star = all_perms[best_idx].tolist()
    _, opt_tsp = tsp_optimum(g)
    big_c = math.ceil(m / n)
    alpha = 32 * big_c + 1
    rep = ReductionReport(count_m1(gad, pi_star), opt_co, opt_tsp, alpha=alpha)
    if gad.nonstandard_ell:
        rep.flags.append("nonstandard-ell")

    cond_i = opt_co <= alpha * opt_tsp
    if not cond_i:
        rep.violations.append(f"phase1 (i): OPT_CO={opt_co} > {alpha}*{opt_tsp}")
    cond_ii = True
    beta1 = rep.beta_phase1
    sample_perms = all_perms if samples is None else np.array([list(p) for p in samples], dtype=np.int64)
    sample_runs = runs if samples is None else co_runs_all(gad, sample_perms)
    for pi, r in zip(sample_perms.tolist(), sample_runs.tolist()):
        _, cost, _ = extract_tsp_solution(gad, pi)
        if cost - opt_tsp > beta1 * (r - opt_co):
            cond_ii = False
            rep.violations.append(f"phase1 (ii) at {pi}: {cost - opt_tsp} > {beta1}*{r - opt_co}")

    ao = build_ao_string(gad)
    sigma = ao.sigma
    rng = random.Random(rng_seed)
    inner = list(range(1, cols - 1))
    extremal = [[0] + inner + [cols - 1]]
    for _ in range(phase2_samples):
        rng.shuffle(inner)
        extremal.append([0] + inner + [cols - 1])
    best_inner = [c for c in pi_star if c not in (gad.cs, gad.ct)]
    # the CO optimum may be the swapped orientation; its mirror has the same m1
    extremal.append([0] + (best_inner if is_extremal(gad, pi_star) else best_inner[::-1]) + [cols - 1])
    measured = []
    for pi in extremal:
        ordering, r0 = canonical_alphabet_order(gad, pi, ao)
        runs_ao = ao_runs(ao, ordering)
        if runs_ao != r0 + sigma - 1:
            rep.violations.append(f"phase2 identity at {pi}: {runs_ao} != {r0} + {sigma} - 1")
        measured.append((pi, co_runs(gad, pi), runs_ao))
    opt_ao = min(x[2] for x in measured)
    rep.ao_runs = opt_ao
    rep.r0 = opt_co - 1
    if opt_ao > alpha * opt_co:
        cond_i = False
        rep.violations.append(f"phase2 (i): OPT_AO={opt_ao} > {alpha}*{opt_co}")
    for pi, r_co, r_ao in measured:
        if r_co - opt_co > rep.beta_phase2 * (r_ao - opt_ao):
            cond_ii = False
            rep.violations.append(f"phase2 (ii) at {pi}: {r_co - opt_co} > {r_ao - opt_ao}")
    rep.condition_i = cond_i
    rep.condition_ii = cond_ii
    return rep
