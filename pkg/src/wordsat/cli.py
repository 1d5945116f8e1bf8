"""Command-line interface.

Exit codes: 0 success, 1 verification failed, 2 input error, 3 cap exceeded.
Errors are printed to stderr as a single-line JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import CapExceeded, InvariantViolation, WordsatError
from .perm import PermutationGroup, derived_series, is_solvable
from .probability import DEFAULT_EXACT_CAP, exact_probability, mc_probability, quotient_monotonicity
from .slp import DEFAULT_WORD_CAP, StraightLineProgram, Word, parse_word
from .structure import DEFAULT_STRUCTURE_CAP, DEFAULT_TUPLE_CAP, is_just_nonsolvable
from .synthesis import (
    quotient_obstruction_check,
    synth_probability_word,
    synth_solvable_word,
    verify_solvable_word,
)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# -- input -------------------------------------------------------------------

def load_group(path: str) -> PermutationGroup:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read group file {path}: {exc.strerror}") from None
    try:
        G = PermutationGroup.loads(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad group file {path}: {exc}") from None
    if G.name is None:
        G.name = Path(path).stem
    return G


def load_word(spec: str) -> Word | StraightLineProgram:
    """Inline word, a text file holding one, or an SLP/report JSON file."""
    path = Path(spec)
    if path.suffix == ".json" or (path.is_file() and path.suffix != ""):
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read word file {spec}: {exc.strerror}") from None
        if path.suffix == ".json":
            try:
                data = json.loads(text)
                if "word_slp" in data:
                    data = data["word_slp"]
                return StraightLineProgram.from_json(data)
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"bad SLP file {spec}: {exc}") from None
        spec = text
    try:
        return parse_word(spec.strip())
    except ValueError as exc:
        raise InputError(f"bad word {spec!r}: {exc}") from None


def _check_arity(w, n: int):
    if w.arity > n:
        raise InputError(f"word uses letters up to x{w.arity} but n = {n}")


# -- output ------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit(obj, out: str | None):
    text = _dump(obj) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report) -> dict:
    out = {"verified": report.verified, "n_or_d": report.arity, "word_slp_size": len(report.word)}
    if report.count is not None:
        out["exact_probability"] = {"num": str(report.count[0]), "den": str(report.count[1]),
                                    "reduced": f"{report.exact.numerator}/{report.exact.denominator}"}
    return out


# -- commands ----------------------------------------------------------------

def cmd_group_info(args) -> int:
    G = load_group(args.group)
    info = {
        "name": G.name,
        "degree": G.degree,
        "generators": [g.cycles() for g in G.generators],
        "order": str(G.order()),
        "base": list(G.chain.base),
        "derived_series_orders": [str(D.order()) for D in derived_series(G)],
        "solvable": is_solvable(G),
    }
    info["just_nonsolvable"] = (is_just_nonsolvable(G) if G.order() <= args.structure_cap else None)
    _emit(info, None)
    return EXIT_OK


def _write_word(report, path: str | None):
    if path:
        Path(path).write_text(report.word.dumps() + "\n")


def cmd_synth_solvable(args) -> int:
    G = load_group(args.group)
    report = synth_solvable_word(G, args.n, cap=args.tuple_cap, word_cap=args.word_cap)
    _emit(report.to_json(), args.output)
    _write_word(report, args.word_out)
    if args.output:
        _emit(_summary(report), None)
    return EXIT_OK if report.verified else EXIT_FAILED


def cmd_synth_prob(args) -> int:
    G = load_group(args.group)
    report = synth_probability_word(G, args.d, args.k, args.orbits, cap=args.tuple_cap,
                                    exact_cap=args.oracle_cap, word_cap=args.word_cap)
    _emit(report.to_json(), args.output)
    _write_word(report, args.word_out)
    if args.output:
        _emit(_summary(report), None)
    return EXIT_OK if report.verified else EXIT_FAILED


def cmd_eval(args) -> int:
    G = load_group(args.group)
    w = load_word(args.word)
    if args.exact:
        res = exact_probability(G, w, cap=args.oracle_cap, profile=args.profile, jobs=args.jobs)
    else:
        if args.seed is None:
            raise InputError("--mc needs --seed")
        res = mc_probability(G, w, args.mc, args.seed, jobs=args.jobs)
    _emit(res.to_json(), args.output)
    return EXIT_OK


def cmd_verify_solvable(args) -> int:
    G = load_group(args.group)
    w = load_word(args.word)
    _check_arity(w, args.n)
    rep = verify_solvable_word(G, args.n, w, cap=args.tuple_cap)
    _emit(rep.to_json(), args.output)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_check_obstruction(args) -> int:
    G = load_group(args.group)
    w = load_word(args.word)
    _check_arity(w, args.n)
    ok = quotient_obstruction_check(G, args.n, w, cap=args.tuple_cap)
    _emit({"group": G.name, "n": args.n, "not_a_quotient": ok}, args.output)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_check_monotonicity(args) -> int:
    G = load_group(args.group)
    K = load_group(args.kernel)
    if K.degree != G.degree:
        raise InputError("kernel and group act on different degrees")
    if not K.is_subgroup_of(G):
        raise InputError("kernel is not a subgroup of the group")
    w = load_word(args.word)
    rep = quotient_monotonicity(G, K, w, cap=args.oracle_cap)
    out = {
        "p_group": _frac(rep.p_group),
        "p_quotient": _frac(rep.p_quotient),
        "p_value_in_kernel": _frac(rep.p_value_in_kernel),
        "inequality_holds": rep.holds,
        "lift_identity_holds": rep.identity_holds,
        "details": rep.details,
    }
    _emit(out, args.output)
    return EXIT_OK if rep.holds and rep.identity_holds else EXIT_FAILED


def _frac(x) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


# -- parser ------------------------------------------------------------------

def _caps(p: argparse.ArgumentParser):
    p.add_argument("--tuple-cap", type=int, default=DEFAULT_TUPLE_CAP,
                   help=f"max |G|^n for tuple enumeration (default {DEFAULT_TUPLE_CAP:.0e})")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_EXACT_CAP,
                   help=f"max tuples for exhaustive word evaluation (default {DEFAULT_EXACT_CAP:.0e})")
    p.add_argument("--word-cap", type=int, default=DEFAULT_WORD_CAP,
                   help=f"max flat word length when expanding SLPs (default {DEFAULT_WORD_CAP:.0e})")
    p.add_argument("--structure-cap", type=int, default=DEFAULT_STRUCTURE_CAP,
                   help=f"max |G| for element-level structure routines (default {DEFAULT_STRUCTURE_CAP:.0e})")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads for evaluation; results do not depend on it")
    p.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wordsat", description="Word maps on finite permutation groups.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    group = sub.add_parser("group", help="group utilities").add_subparsers(dest="action", required=True,
                                                                          parser_class=_Parser)
    p = group.add_parser("info", help="order, base, derived series")
    p.add_argument("group")
    _caps(p)
    p.set_defaults(func=cmd_group_info)

    synth = sub.add_parser("synth", help="synthesize words").add_subparsers(dest="action", required=True,
                                                                           parser_class=_Parser)
    p = synth.add_parser("solvable", help="word vanishing exactly on solvable-generating tuples")
    p.add_argument("--group", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--word-out", help="also write the word as an SLP JSON file")
    _caps(p)
    p.set_defaults(func=cmd_synth_solvable)

    p = synth.add_parser("prob", help="word vanishing on k selected Aut-orbits of generating tuples")
    p.add_argument("--group", required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--orbits", type=int, default=None, help="number of orbits to select (default all)")
    p.add_argument("--word-out", help="also write the word as an SLP JSON file")
    _caps(p)
    p.set_defaults(func=cmd_synth_prob)

    p = sub.add_parser("eval", help="satisfaction probability of a word")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True, help="inline word, word text file, or SLP/report JSON")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", type=int, metavar="N", help="Monte Carlo with N samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--profile", action="store_true", help="split exact counts by solvability")
    _caps(p)
    p.set_defaults(func=cmd_eval)

    verify = sub.add_parser("verify", help="verify words").add_subparsers(dest="action", required=True,
                                                                         parser_class=_Parser)
    p = verify.add_parser("solvable", help="check w(t) = 1 iff <t> solvable on all of G^n")
    p.add_argument("--group", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--word", required=True)
    _caps(p)
    p.set_defaults(func=cmd_verify_solvable)

    check = sub.add_parser("check", help="structural checks").add_subparsers(dest="action", required=True,
                                                                            parser_class=_Parser)
    p = check.add_parser("quotient-obstruction", help="no generating n-tuple satisfies w")
    p.add_argument("--group", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--word", required=True)
    _caps(p)
    p.set_defaults(func=cmd_check_obstruction)

    p = check.add_parser("monotonicity", help="P(G, w) <= P(G/K, w)")
    p.add_argument("--group", required=True)
    p.add_argument("--kernel", required=True, help="normal subgroup as a group JSON file")
    p.add_argument("--word", required=True)
    _caps(p)
    p.set_defaults(func=cmd_check_monotonicity)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        return _fail(EXIT_INPUT, "usage", str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapExceeded as exc:
        return _fail(EXIT_CAP, "cap_exceeded", str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_FAILED, "invariant_violation", str(exc))
    except (InputError, WordsatError, ValueError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))


run = main


if __name__ == "__main__":
    sys.exit(main())
