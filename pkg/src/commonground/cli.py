"""Command-line interface.

Exit codes: 0 success, 1 parse or I/O error, 2 refused or failed check,
3 oracle found nothing, 4 internal invariant violation (a bug).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence, TextIO

from . import __version__
from .analysis import conflicts, dependency_graph, find_cycle, incoherences, redundant_clauses
from .core import format_clause
from .merge import Ground, InternalInvariantViolation, merge, preconditions
from .oracle import DEFAULT_CAP, BoundsExplosion, SearchBounds, search
from .parser import ParseError, RuleFile, expression_text, parse, serialize
from .postulates import check_all

EXIT_OK, EXIT_INPUT, EXIT_REFUSED, EXIT_NOTHING_FOUND, EXIT_BUG = 0, 1, 2, 3, 4


class _InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise _InputError(f"{path}: not valid UTF-8 ({exc.reason})") from exc


def _load(path: str, strict: bool, err: TextIO, background=None) -> RuleFile:
    text = _read(path)
    try:
        rf = parse(text, strict=strict, background=background)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d.render(path), file=err)
        raise _InputError() from exc
    for d in rf.diagnostics:
        print(d.render(path), file=err)
    return rf


def _emit(text: str, out_path: str | None, out: TextIO) -> None:
    if out_path is None:
        out.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _InputError(f"{out_path}: {exc.strerror or exc}") from exc


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _cmd_check(args, out, err) -> int:
    rf = _load(args.file, args.strict, err)
    f, b, comp = rf.union(), rf.background, rf.complements
    fmt = lambda c: format_clause(c, comp)  # noqa: E731
    cycle = find_cycle(f)
    redundant = redundant_clauses(f)
    clashes = [{"phi": fmt(phi), "psi": fmt(psi)} for phi, psi in conflicts(f, b)]
    incoherent = [
        {"clause": fmt(i.clause), "reason": i.reason, **({"other": fmt(i.other)} if i.other else {})}
        for i in incoherences(f, b)
    ]
    report = {
        "coherent": not incoherent,
        "cyclic": cycle is not None,
        "redundant": bool(redundant),
        "in_conflict": bool(clashes),
        "witnesses": {
            "cycle": [fmt(c) for c in cycle] if cycle else None,
            "redundant": [fmt(c) for c in redundant],
            "conflicts": clashes,
            "incoherent": incoherent,
        },
    }
    out.write(_json(report))
    return EXIT_OK if not preconditions(f, b) else EXIT_REFUSED


def _cmd_merge(args, out, err) -> int:
    rf = _load(args.file, args.strict, err)
    result = merge(rf, unsafe=args.unsafe_selection)
    if not isinstance(result, Ground):
        out.write(_json({"status": "refused", "reasons": sorted(result.reasons)}))
        return EXIT_REFUSED
    ground = RuleFile(rf.background, ((1, result.expression),))
    _emit(serialize(ground), args.out, out)
    if args.trace:
        trace = result.trace.as_dict(rf.complements)
        trace["input_clauses"] = len(rf.union())
        _emit(_json(trace), args.trace, out)
    return EXIT_OK


def _cmd_verify(args, out, err) -> int:
    rf = _load(args.file, args.strict, err)
    cand = _load(args.candidate, args.strict, err, background=rf.background)
    report = check_all(rf.inputs, cand.union(), rf.background, args.p6_premise)
    out.write(_json(report.as_dict(rf.complements)))
    return EXIT_OK if report.all_pass else EXIT_REFUSED


def _cmd_graph(args, out, err) -> int:
    rf = _load(args.file, args.strict, err)
    _emit(dependency_graph(rf.union(), rf.background).to_dot(rf.complements), args.out, out)
    return EXIT_OK


def _cmd_oracle(args, out, err) -> int:
    rf = _load(args.file, args.strict, err)
    bounds = SearchBounds(
        max_added_atoms_per_clause=args.max_atoms,
        max_weakenings_per_input_clause=args.max_weakenings,
        cap=args.cap,
        allow_degenerate=args.allow_degenerate,
        max_found=args.max_found,
    )
    refused = preconditions(rf.union(), rf.background)
    try:
        result = search(rf, bounds)
    except BoundsExplosion as exc:
        print(f"{args.file}: oracle gave up: {exc}", file=err)
        return EXIT_NOTHING_FOUND
    report = {
        "found_count": len(result.found),
        "exhausted": result.exhausted,
        "visited": result.visited,
        "refused": refused,
        "grounds": [expression_text(g, rf.complements) for g in result.found],
    }
    out.write(_json(report))
    if result.found or refused:
        return EXIT_OK
    return EXIT_NOTHING_FOUND


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strict", action="store_true", help="treat trivial rules as errors")

    ap = argparse.ArgumentParser(prog="commonground", description="Merge stakeholder Horn rules into a common ground.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("check", parents=[common], help="report coherence, cycles, redundancy and conflict")
    p.add_argument("file")
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("merge", parents=[common], help="build a common ground")
    p.add_argument("file")
    p.add_argument("--out", help="write the common ground here instead of stdout")
    p.add_argument("--trace", help="write the iteration trace as JSON to this file")
    p.add_argument("--unsafe-selection", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(run=_cmd_merge)

    p = sub.add_parser("verify", parents=[common], help="check a candidate against the six postulates")
    p.add_argument("file")
    p.add_argument("candidate")
    p.add_argument("--p6-premise", choices=("all", "any"), default="all",
                   help="quantifier for the coherence premise of P6 (default: all)")
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser("graph", parents=[common], help="write the dependency graph as DOT")
    p.add_argument("file")
    p.add_argument("--out", help="write DOT here instead of stdout")
    p.set_defaults(run=_cmd_graph)

    p = sub.add_parser("oracle", parents=[common], help="bounded search for every common ground")
    p.add_argument("file")
    p.add_argument("--max-atoms", type=_non_negative, default=1, help="atoms added per weakening (default 1)")
    p.add_argument("--max-weakenings", type=_positive, default=2, help="weakenings kept per input rule (default 2)")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="give up after this many search nodes")
    p.add_argument("--max-found", type=_positive, default=None, help="stop after this many grounds")
    p.add_argument("--allow-degenerate", action="store_true",
                   help="also try weakenings whose antecedent holds two disjoint atoms")
    p.set_defaults(run=_cmd_oracle)
    return ap


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.run(args, out, err)
    except _InputError as exc:
        if str(exc):
            print(str(exc), file=err)
        return EXIT_INPUT
    except InternalInvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=err)
        return EXIT_BUG


def main() -> None:
    sys.exit(run())
