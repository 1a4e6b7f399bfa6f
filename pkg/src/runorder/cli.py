"""Command-line front end.

Every command writes one JSON report (to stdout or ``--out``).  Bulky
payloads such as the BWT itself, an inverted text or a tuple dump go to
stderr so the report stays machine-readable.  Exit codes: 0 success,
2 usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import cao, ordering_search, reductions, wheeler
from .bwt_core import (SENTINEL, AlphabetOrdering, Symbol, Text, build_bwt, byte_symbol, circular_bwt,
                       count_runs, invert_bwt)
from .errors import InvalidInputError, RunOrderError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3


@dataclass
class Report:
    command: str
    digest: str
    runs: int | None
    ordering: list[str]
    method: str
    explored: int | None = None
    elapsed_ms: float | None = None
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


# -- parsing -----------------------------------------------------------------

def parse_ordering_spec(spec: str, alphabet: Iterable[Symbol]) -> AlphabetOrdering:
    """Comma-separated symbol tokens, or ``@path`` to read them from a file.

    Tokens are the printed symbol names (``a``, ``\\x2c``, ``$3``, ``C1``);
    ``$`` is the sentinel and is prepended when omitted.  Every alphabet
    symbol must appear exactly once.
    """
    if spec.startswith("@"):
        try:
            spec = Path(spec[1:]).read_text(encoding="latin-1").strip()
        except OSError as exc:
            raise InvalidInputError(f"cannot read ordering file: {exc}") from None
    alphabet = set(alphabet) - {SENTINEL}
    by_name = {str(s): s for s in alphabet}
    by_name["$"] = SENTINEL
    syms: list[Symbol] = []
    seen: set[Symbol] = set()
    for tok in spec.split(","):
        tok = tok.strip()
        if tok not in by_name:
            raise InvalidInputError(f"unknown symbol {tok!r} in ordering")
        s = by_name[tok]
        if s in seen:
            raise InvalidInputError(f"duplicate symbol {tok!r} in ordering")
        seen.add(s)
        syms.append(s)
    missing = sorted(alphabet - seen)
    if missing:
        raise InvalidInputError(f"ordering is missing symbol {str(missing[0])!r}")
    if SENTINEL not in seen:
        syms.insert(0, SENTINEL)
    return AlphabetOrdering(tuple(syms))


def _lines(data: bytes) -> list[str]:
    return data.decode("latin-1").splitlines()


def _int_fields(line: str, k: int, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != k:
        raise InvalidInputError(f"line {lineno}: expected {k} fields, got {len(parts)}")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise InvalidInputError(f"line {lineno}: non-integer field in {line!r}") from None


def parse_instance(data: bytes, fmt: str):
    if not data:
        raise InvalidInputError("empty input")
    if fmt == "text":
        return Text.of(data)
    if fmt == "collection":
        return cao.StringCollection.of(line.encode("latin-1") for line in _lines(data))
    if fmt in ("edgelist", "wg-edgelist"):
        k = 2 if fmt == "edgelist" else 3
        rows = []
        for lineno, line in enumerate(_lines(data), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            rows.append(_int_fields(line, k, lineno))
        if not rows:
            raise InvalidInputError("no edges in input")
        if fmt == "edgelist":
            return reductions.TspInstance.from_edges(rows)
        return wheeler.WheelerGraph.from_edges(rows)
    raise ValueError(f"unknown format {fmt!r}")


def ingest(path: str | Path, fmt: str):
    """Read ``path`` as text, collection, edgelist or wg-edgelist."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(data, fmt), data


def digest(fmt: str, data: bytes, *extra) -> str:
    h = hashlib.sha256()
    h.update(fmt.encode())
    h.update(b"\0")
    h.update(data)
    for x in extra:
        h.update(b"\0" + str(x).encode())
    return "sha256:" + h.hexdigest()[:16]


def _names(ordering: AlphabetOrdering) -> list[str]:
    return [str(s) for s in ordering.symbols]


# -- commands ----------------------------------------------------------------

def _text_source(args) -> tuple[Text, bytes]:
    if args.text is not None:
        data = args.text.encode("latin-1")
        if not data:
            raise InvalidInputError("empty text")
        return Text.of(data), data
    inst, data = ingest(args.input, "text")
    return inst, data


def _gadget_source(args) -> tuple[reductions.TspInstance, reductions.IncidenceGadget, bytes]:
    g, data = ingest(args.input if args.command == "gadget" else args.gadget, "edgelist")
    return g, reductions.build_gadget_matrix(g, args.ell), data


def _gadget_flags(gad: reductions.IncidenceGadget) -> list[str]:
    return ["nonstandard-ell"] if gad.nonstandard_ell else []


def _column_order(args, gad) -> list[int]:
    if not getattr(args, "columns", None):
        return list(range(gad.n_cols))
    by_name = {name: j for j, name in enumerate(gad.column_names())}
    try:
        pi = [by_name[t.strip()] for t in args.columns.split(",")]
    except KeyError as exc:
        raise InvalidInputError(f"unknown column {exc.args[0]!r}") from None
    if sorted(pi) != list(range(gad.n_cols)):
        raise InvalidInputError("--columns must list every column exactly once")
    return pi


def cmd_bwt(args, err) -> Report:
    flags: list[str] = []
    if args.collection:
        coll, data = ingest(args.collection, "collection")
        text, fmt, circular = coll.text(), "collection", True
    elif args.gadget:
        _, gad, data = _gadget_source(args)
        text, fmt, circular = reductions.build_ao_string(gad).text, "gadget", True
        flags += _gadget_flags(gad)
    else:
        text, data = _text_source(args)
        fmt, circular = "text", False
    ordering = (parse_ordering_spec(args.order, text.alphabet) if args.order
                else AlphabetOrdering.standard(text.alphabet))
    out = (circular_bwt if circular else build_bwt)(text, ordering)
    if circular:
        flags.append("circular")
    if args.command == "bwt":
        err.write(str(out) + "\n")
    return Report(args.command, digest(fmt, data, args.ell if args.gadget else ""), out.runs,
                  _names(ordering), "direct", None, None, flags)


def cmd_invert(args, err) -> Report:
    raw = args.text if args.text is not None else Path(args.input).read_bytes().decode("latin-1").rstrip("\n")
    if not raw:
        raise InvalidInputError("empty input")
    data = raw.encode("latin-1")
    symbols = tuple(SENTINEL if ch == "$" else byte_symbol(ch) for ch in raw)
    alphabet = set(symbols) - {SENTINEL}
    ordering = parse_ordering_spec(args.order, alphabet) if args.order else AlphabetOrdering.standard(alphabet)
    text = invert_bwt(symbols, ordering)
    err.write(str(text) + "\n")
    return Report("invert", digest("bwt", data), count_runs(symbols), _names(ordering), "lf-walk", None, None, [])


def cmd_search(args, err) -> Report:
    text, data = _text_source(args)
    if args.mode == "exact":
        res = ordering_search.exact_search(text, limit=args.limit, threads=args.threads)
    else:
        seed = parse_ordering_spec(args.order, text.alphabet) if args.order else None
        res = ordering_search.local_search(text, seed=seed, budget=args.budget, rng_seed=args.seed)
    return Report("search", digest("text", data), res.runs, _names(res.ordering), res.method,
                  res.explored, None, [f"seed={args.seed}"] if args.mode == "local" else [])


def cmd_ratio(args, err) -> Report:
    text, data = _text_source(args)
    rep = ordering_search.ratio_report(text, mode=args.mode, samples=args.samples,
                                       rng_seed=args.seed, limit=args.limit)
    flags = [f"max_runs={rep.max_runs}", f"ratio={rep.ratio}", f"ratio_float={float(rep.ratio):.6f}",
             f"log2n_squared={rep.log2n_reference:.6f}", f"doubling_bound={rep.doubling_bound}"]
    return Report("ratio", digest("text", data), rep.min_runs, [], args.mode, rep.explored, None, flags)


def cmd_cao(args, err) -> Report:
    coll, data = ingest(args.input, "collection")
    blocks = cao.build_blocks(coll)
    arrangement = cao.greedy_tuple_order(blocks.tuples)
    pi = cao.reconstruct_pi(blocks, arrangement)
    if args.emit_tuples:
        err.write(cao.format_tuples(blocks.tuples, coll.d) + "\n")
    ordering = pi.alphabet_ordering(coll)
    return Report("cao", digest("collection", data), arrangement.runs, _names(ordering),
                  "tuple-greedy", len(blocks), None, [f"d={coll.d}", f"N={coll.N}"])


def cmd_gadget(args, err) -> Report:
    g, gad, data = _gadget_source(args)
    dg = digest("edgelist", data, gad.ell)
    flags = _gadget_flags(gad)
    if args.action == "build":
        for row in gad.matrix.tolist():
            err.write("".join(map(str, row)) + "\n")
        pi = _column_order(args, gad)
        rep = reductions.linearize_and_cost(gad, pi)
        flags += [f"rows={gad.n_rows}", f"cols={gad.n_cols}", f"m1={rep.m1}", f"tsp_cost={rep.tsp_cost}"]
        return Report("gadget build", dg, rep.co_runs, [gad.column_names()[j] for j in pi], "linearize",
                      None, None, flags)
    if args.action == "ao-string":
        ao = reductions.build_ao_string(gad)
        err.write(str(ao.text) + "\n")
        pi = _column_order(args, gad)
        ordering, r0 = reductions.canonical_alphabet_order(gad, pi, ao)
        runs = reductions.ao_runs(ao, ordering)
        flags += [f"sigma={ao.sigma}", f"substrings={len(ao.provenance)}", f"r0={r0}", "circular"]
        return Report("gadget ao-string", dg, runs, _names(ordering), "canonical", None, None, flags)
    rep = reductions.verify_l_reduction(g, ell=args.ell, rng_seed=args.seed)
    flags += [f"condition_i={'pass' if rep.condition_i else 'fail'}",
              f"condition_ii={'pass' if rep.condition_ii else 'fail'}",
              f"alpha={rep.alpha}", f"beta_phase1={rep.beta_phase1}", f"beta_phase2={rep.beta_phase2}",
              f"opt_tsp={rep.tsp_cost}", f"opt_ao_upper={rep.ao_runs}"]
    flags += [f"violation: {v}" for v in rep.violations]
    return Report("gadget verify", dg, rep.co_runs, [], "exhaustive", None, None, flags)


def _source_order(args, g: wheeler.WheelerGraph) -> list[int]:
    if not args.sources:
        return g.sources
    try:
        order = [int(t) for t in args.sources.split(",")]
    except ValueError:
        raise InvalidInputError("--sources must be comma-separated vertex ids") from None
    return order


def cmd_wheeler(args, err) -> Report:
    g, data = ingest(args.input, "wg-edgelist")
    dg = digest("wg-edgelist", data)
    if args.action == "validate":
        if args.phi:
            try:
                phi = wheeler.ProperOrdering(tuple(int(t) for t in args.phi.split(",")))
            except ValueError:
                raise InvalidInputError("--phi must be comma-separated vertex ids") from None
        else:
            phi = wheeler.proper_order(g, _source_order(args, g))
        ok, why = wheeler.validate(g, phi)
        if not ok:
            raise RunOrderError(f"not a proper ordering: {why.reason} {list(why.edges)}")
        return Report("wheeler validate", dg, wheeler.wg_bwt(g, phi).runs, [str(v) for v in phi.order],
                      "validate", None, None, ["proper"])
    if args.action == "bwt":
        phi, runs = wheeler.best_sibling_order(g, _source_order(args, g))
        err.write(" ".join(map(str, wheeler.wg_bwt(g, phi).string)) + "\n")
        return Report("wheeler bwt", dg, runs, [str(v) for v in phi.order], "block-greedy", None, None, [])
    res = wheeler.so_brute_force(g, limit=args.limit)
    return Report("wheeler so", dg, res.runs, [str(v) for v in res.order], "exhaustive", res.explored, None,
                  [f"argmin_count={len(res.argmin)}"])


# -- argparse ----------------------------------------------------------------

def _add_text_source(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text", help="literal text (latin-1)")
    src.add_argument("--input", help="file read as raw bytes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="runorder", description="BWT run minimisation over alphabet orderings")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--timing", action="store_true", help="record elapsed_ms (otherwise null)")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("bwt", "runs"):
        p = sub.add_parser(name, help="BWT of a text, collection or AO gadget text" if name == "bwt" else "run count only")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--text")
        src.add_argument("--input")
        src.add_argument("--collection", help="one string per line; circular BWT with implicit terminators")
        src.add_argument("--gadget", help="edge list; circular BWT of the alphabet-ordering gadget text")
        p.add_argument("--order", help="comma-separated symbols or @file")
        p.add_argument("--ell", type=int, default=None)

    p = sub.add_parser("invert", help="recover a text from its BWT ('$' is the sentinel)")
    _add_text_source(p)
    p.add_argument("--order")

    p = sub.add_parser("search", help="minimise runs over admissible orderings")
    _add_text_source(p)
    p.add_argument("--mode", choices=("exact", "local"), default="exact")
    p.add_argument("--order", help="starting ordering for local search")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=ordering_search.DEFAULT_LIMIT)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("ratio", help="max/min runs across orderings")
    _add_text_source(p)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=ordering_search.DEFAULT_LIMIT)

    p = sub.add_parser("cao", help="optimal terminator order for a string collection")
    p.add_argument("--input", required=True)
    p.add_argument("--emit-tuples", action="store_true")

    p = sub.add_parser("gadget", help="TSP to column-ordering to alphabet-ordering reduction")
    p.add_argument("action", choices=("build", "ao-string", "verify"))
    p.add_argument("--input", required=True, help="edge list, one 'u v' pair per line")
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--columns", help="column order such as C1,C3,C2,C4 (default: identity)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("wheeler", help="Wheeler forests: validation, BWT, source ordering")
    p.add_argument("action", choices=("validate", "bwt", "so"))
    p.add_argument("--input", required=True, help="edge list, one 'u v label' triple per line")
    p.add_argument("--sources", help="source order, comma-separated")
    p.add_argument("--phi", help="full vertex order to validate, comma-separated")
    p.add_argument("--limit", type=int, default=40320)
    return parser


HANDLERS = {
    "bwt": cmd_bwt, "runs": cmd_bwt, "invert": cmd_invert, "search": cmd_search,
    "ratio": cmd_ratio, "cao": cmd_cao, "gadget": cmd_gadget, "wheeler": cmd_wheeler,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        report = HANDLERS[args.command](args, err)
    except (RunOrderError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    if args.timing:
        report.elapsed_ms = round((time.perf_counter() - start) * 1000, 3)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
