"""Command line entry point.

Every subcommand calls one library function and prints its result; with
``--format json`` the result is wrapped in a stable envelope.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import SCHEMA_VERSION, __version__
from .cancellation import bound_report, max_piece_length
from .core import DEFAULT_BUDGET, lallop, write_certificate
from .diagram import lallop_ratio, load_document, metrics, phi_of_diagram, validate_diagram, volume_upper_bound
from .errors import LallopError, UsageError
from .pods import render_pod
from .survey import SurveyConfig, rows_to_csv, run_survey, write_csv
from .words import cyclically_reduce, evaluate, parse_word, primitive_root, render


def frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _alphabet_for(text: str, given):
    if given:
        return given
    letters = [c for c in text if c.isalpha()]
    top = max((ord(c.lower()) - 96 for c in letters), default=2)
    return max(2, top)


def _word(text: str, alphabet):
    return parse_word(text, _alphabet_for(text, alphabet))


# --- handlers: each returns (payload dict, text lines) -----------------------------------

def cmd_word(args):
    if args.action == "eval":
        binds = {}
        for b in args.bind or []:
            name, _, value = b.partition("=")
            if not name or not value:
                raise UsageError(f"--bind expects name=word, got {b!r}")
            binds[name] = parse_word(value, args.alphabet or 26)
        w = evaluate(args.word, binds, args.alphabet)
        return {"word": render(w), "length": len(w)}, [render(w)]
    w = _word(args.word, args.alphabet)
    if args.action == "reduce":
        core, conj = cyclically_reduce(w)
        payload = {"reduced": render(w), "cyclic_core": render(core), "conjugator": render(conj)}
        return payload, [render(w)]
    dec = primitive_root(w)
    payload = {"root": render(dec.root), "exponent": dec.exponent, "conjugator": render(dec.conjugator)}
    return payload, [f"{render(dec.root)}^{dec.exponent}" + (f" conjugated by {render(dec.conjugator)}"
                                                            if dec.conjugator else "")]


def cmd_piece(args):
    r = _word(args.word, args.alphabet)
    rep = max_piece_length(r)
    payload = {"word": render(r), "length": len(r), "max_piece_length": rep.max_piece_length,
               "c_prime_threshold": rep.c_prime_threshold,
               "witness": None if rep.witness is None else {
                   "first": {"offset": rep.witness[0][0], "inverse": rep.witness[0][1]},
                   "second": {"offset": rep.witness[1][0], "inverse": rep.witness[1][1]},
                   "piece": rep.witness[2]}}
    lines = [f"max piece length {rep.max_piece_length}"
             + (f" ({rep.witness[2]})" if rep.witness else ""),
             f"satisfies C'(1/N) for N <= {rep.c_prime_threshold}"]
    if args.N is not None:
        ok = rep.satisfies(args.N)
        payload["N"] = args.N
        payload["satisfies"] = ok
        lines.append(f"C'(1/{args.N}): {'yes' if ok else 'no'}")
    return payload, lines


def cmd_bounds(args):
    r = _word(args.word, args.alphabet)
    scl = Fraction(args.scl) if args.scl is not None else None
    rep = bound_report(r, scl)
    items = [{"quantity": b.quantity, "side": b.side, "value": frac(b.value), "strict": b.strict,
              "provenance": b.provenance} for b in rep.bounds]
    lo, hi = rep.interval("simvol")
    payload = {"word": render(r), "scl": None if scl is None else frac(scl), "root": render(rep.root),
               "power": rep.power, "bounds": items,
               "simvol_interval": [None if lo is None else frac(lo), None if hi is None else frac(hi)],
               "decomposition": rep.decomposition.describe() if rep.decomposition else None}
    lines = []
    for b in rep.bounds:
        op = {"lower": ">=", "upper": "<" if b.strict else "<="}[b.side]
        lines.append(f"{b.quantity} {op} {frac(b.value)}  [{b.provenance}]")
    if not lines:
        lines.append("no bounds apply")
    return payload, lines


def cmd_diagram(args):
    doc = load_document(args.file)
    D = validate_diagram(doc)
    if args.action == "check":
        payload = {"valid": True, "V": D.num_vertices, "E": D.num_edges, "F": D.num_disks}
        return payload, [f"valid: V={D.num_vertices} E={D.num_edges} F={D.num_disks}"]
    if args.action == "metrics":
        m = metrics(D)
        payload = m.as_dict()
        lines = [f"V={m.vertices} E={m.edges} F={m.faces} chi={m.chi} chi-={m.chi_minus}",
                 f"degree={m.total_degree} genus={list(m.genus)} reduced={m.reduced}"]
        if m.total_degree:
            ub, ratio = volume_upper_bound(D), lallop_ratio(D)
            payload["volume_upper_bound"] = frac(ub)
            payload["lallop_ratio"] = frac(ratio)
            lines.append(f"volume upper bound {frac(ub)}, lallop ratio {frac(ratio)}")
        return payload, lines
    pods = phi_of_diagram(D)
    items = [{"pod": render_pod(p), "multiplicity": m} for p, m in sorted(pods.items())]
    return {"pods": items}, [f"{m} x {render_pod(p)}" for p, m in sorted(pods.items())]


def cmd_lallop(args):
    w = _word(args.word, args.alphabet)
    log = (lambda s: print(s, file=sys.stderr)) if args.verbose else None
    res = lallop(w, mode=args.mode, solver=args.solver, tol=args.tol, budget=args.budget, log=log)
    if args.certificate:
        write_certificate(res, args.certificate)
    return res.as_dict(), [frac(res.value)]


def cmd_survey(args):
    lengths = [int(x) for x in args.lengths.split(",") if x.strip()]
    cfg = SurveyConfig(alphabet_size=args.alphabet, lengths=lengths, samples=args.samples, seed=args.seed,
                       lallop_mode=args.with_lallop, workers=args.threads or 1)
    rows = run_survey(cfg)
    if args.out:
        write_csv(rows, args.out, include_raw=args.raw, append=args.append)
    text = rows_to_csv(rows, include_raw=args.raw)
    return {"rows": [r.as_dict() for r in rows], "out": args.out}, text.rstrip("\n").split("\n")


# --- parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker cap")

    p = _Parser(prog="lallop", description="Bounds for the simplicial volume of one-relator groups.")
    p.add_argument("--version", action="version", version=f"schema {SCHEMA_VERSION} (lallop {__version__})")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("word", parents=[common], help="word utilities")
    w.add_argument("action", choices=("reduce", "root", "eval"))
    w.add_argument("word")
    w.add_argument("--alphabet", type=int)
    w.add_argument("--bind", action="append", help="name=word binding for eval")
    w.set_defaults(func=cmd_word)

    pc = sub.add_parser("piece", parents=[common], help="maximal piece length")
    pc.add_argument("word")
    pc.add_argument("--N", type=int)
    pc.add_argument("--alphabet", type=int)
    pc.set_defaults(func=cmd_piece)

    b = sub.add_parser("bounds", parents=[common], help="structural bounds")
    b.add_argument("word")
    b.add_argument("--scl", help="exact scl as p/q")
    b.add_argument("--alphabet", type=int)
    b.set_defaults(func=cmd_bounds)

    d = sub.add_parser("diagram", parents=[common], help="van Kampen diagram files")
    d.add_argument("action", choices=("check", "metrics", "phi"))
    d.add_argument("file")
    d.set_defaults(func=cmd_diagram)

    lp = sub.add_parser("lallop", parents=[common], help="solve the lallop program")
    lp.add_argument("word")
    lp.add_argument("--mode", choices=("full", "truncated"), default="full")
    lp.add_argument("--solver", choices=("exact", "float"), default="exact")
    lp.add_argument("--tol", type=float, default=1e-9)
    lp.add_argument("--certificate")
    lp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    lp.add_argument("--alphabet", type=int)
    lp.add_argument("--verbose", action="store_true", help="pricing log on stderr")
    lp.set_defaults(func=cmd_lallop)

    s = sub.add_parser("survey", parents=[common], help="random-word statistics")
    s.add_argument("--alphabet", type=int, default=2)
    s.add_argument("--lengths", default="16,24,32")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--out")
    s.add_argument("--append", action="store_true", help="append rows to an existing CSV")
    s.add_argument("--raw", action="store_true", help="add the non-cyclically-reduced columns")
    s.add_argument("--with-lallop", choices=("full", "truncated"))
    s.set_defaults(func=cmd_survey)
    return p


def _inputs(args) -> dict:
    skip = {"func", "format", "threads", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv=None) -> int:
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        payload, lines = args.func(args)
    except LallopError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"InputError: {exc}", file=sys.stderr)
        return 1
    if args.format == "json":
        env = {"command": args.command, "inputs": _inputs(args), "result": payload, "warnings": [],
               "version": SCHEMA_VERSION, "timing": round(time.perf_counter() - t0, 3)}
        print(json.dumps(env, indent=2, default=str))
    else:
        print("\n".join(lines))
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
