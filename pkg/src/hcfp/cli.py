"""Command-line front end.

Exit status: 0 on success, 1 on any error (bad input, failed check),
2 when a saturation ran out of budget (a partial result is still written).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import flat as F
from . import nested as N
from .constrained import prestar_constrained, to_flat
from .errors import BudgetExhausted, HcfpError
from .formats import (format_automaton, load_automaton, load_formula, load_model, parse_formula_text,
                      to_dot)
from .logic import Checker
from .oracle import Bounds, crosscheck_constrained, crosscheck_prestar
from .saturation import SaturationConfig, pre, prestar
from .store import encode, parse as parse_store

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2

PARTIAL_BANNER = "PARTIAL: saturation stopped on its budget; the result is an under-approximation"


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the budget exit status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _nested(B, n):
    if F.is_empty(B):
        return N.empty_nested(B.alphabet, n)
    return N.inflate(B, n, B.alphabet)


def _load_set(path, h):
    return _nested(load_automaton(path, h.level, h.alphabet), h.level)


def _config(args) -> SaturationConfig:
    cfg = SaturationConfig()
    if getattr(args, "max_passes", None):
        cfg.max_passes = args.max_passes
    if getattr(args, "max_labels", None):
        cfg.max_interned_labels = args.max_labels
    return cfg


def _emit(args, result, out) -> None:
    if args.out:
        Path(args.out).write_text(format_automaton(result), encoding="utf-8")
    else:
        out.write(format_automaton(result))
    if getattr(args, "dot", None):
        Path(args.dot).write_text(to_dot(result), encoding="utf-8")


def _report(rep, out) -> None:
    for line in rep.lines():
        out.write(line + "\n")


# ---------------------------------------------------------------- commands

def cmd_pre(args, out) -> int:
    h = load_model(args.model)
    _emit(args, pre(h, _load_set(args.set, h)), out)
    return EXIT_OK


def _saturate(args, out, run) -> int:
    try:
        result, rep = run()
    except BudgetExhausted as e:
        out.write(PARTIAL_BANNER + "\n")
        _emit(args, e.partial, out)
        _report(e.report, out)
        return EXIT_BUDGET
    _emit(args, result, out)
    _report(rep, out)
    return EXIT_OK


def cmd_prestar(args, out) -> int:
    h = load_model(args.model)
    S = _load_set(args.set, h)
    return _saturate(args, out, lambda: prestar(h, S, _config(args)))


def cmd_prestar_constrained(args, out) -> int:
    h = load_model(args.model)
    S = _load_set(args.set, h)
    C = load_automaton(args.constraint, h.level, h.alphabet)

    def run():
        try:
            R, rep = prestar_constrained(h, S, C, _config(args))
        except BudgetExhausted as e:
            e.partial = to_flat(e.partial).with_level(h.level)
            raise
        return to_flat(R).with_level(h.level), rep

    return _saturate(args, out, run)


def _atoms(specs, h) -> dict:
    atoms = {}
    for spec in specs or ():
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).stem, spec
        if name in atoms:
            raise HcfpError(f"atom {name!r} registered twice")
        atoms[name] = load_automaton(path, h.level, h.alphabet)
    return atoms


def cmd_mc(args, out) -> int:
    h = load_model(args.model)
    atoms = _atoms(args.set, h)
    if Path(args.formula).is_file():
        phi = load_formula(args.formula, atoms)
    else:
        phi = parse_formula_text(args.formula, atoms, "<--formula>")
    checker = Checker(h, atoms, _config(args))
    res = checker.evaluate(phi)
    if not res.exact:
        out.write(PARTIAL_BANNER + "\n")
    if args.store is not None:
        s = parse_store(args.store, h.level)
        yes = F.member(res.flat, encode(s))
        out.write("yes\n" if yes else ("no\n" if res.exact else "unknown\n"))
    if args.out or args.store is None:
        _emit(args, res.automaton, out)
    return EXIT_OK if res.exact else EXIT_BUDGET


def cmd_member(args, out) -> int:
    A = load_automaton(args.auto)
    s = parse_store(args.store, A.level)
    out.write("yes\n" if F.member(A, encode(s)) else "no\n")
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    h = load_model(args.model)
    S = _load_set(args.set, h)
    result = load_automaton(args.result, h.level, h.alphabet)
    b = Bounds(max_encoded_size=args.max_size, max_depth=args.max_depth,
               max_start_size=args.max_start_size or min(args.max_size, 12))
    if args.kind == "constrained":
        if not args.constraint:
            raise HcfpError("oracle constrained needs --constraint")
        C = load_automaton(args.constraint, h.level, h.alphabet)
        rep = crosscheck_constrained(h, S, C, result, b)
    else:
        rep = crosscheck_prestar(h, S, result, b)
    for line in rep.lines():
        out.write(line + "\n")
    out.write(rep.summary() + "\n")
    return EXIT_OK if rep.ok else EXIT_ERROR


def cmd_export(args, out) -> int:
    A = load_automaton(args.auto)
    target = _nested(A, A.level) if A.level is not None and not args.flat else A
    text = to_dot(target)
    if args.dot:
        Path(args.dot).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hcfp", description="Reachability and E(U,X) model checking "
                                          "for higher-order context-free processes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def budget(sp):
        sp.add_argument("--max-passes", type=int)
        sp.add_argument("--max-labels", type=int)

    def output(sp):
        sp.add_argument("--out", help="result automaton file (stdout if omitted)")
        sp.add_argument("--dot", help="also write a Graphviz rendering here")

    sp = sub.add_parser("pre", help="one-step predecessors")
    sp.add_argument("--model", required=True)
    sp.add_argument("--set", required=True)
    output(sp)
    sp.set_defaults(func=cmd_pre)

    sp = sub.add_parser("prestar", help="all predecessors")
    sp.add_argument("--model", required=True)
    sp.add_argument("--set", required=True)
    output(sp)
    budget(sp)
    sp.set_defaults(func=cmd_prestar)

    sp = sub.add_parser("prestar-constrained", help="predecessors through a constraint")
    sp.add_argument("--model", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--constraint", required=True)
    output(sp)
    budget(sp)
    sp.set_defaults(func=cmd_prestar_constrained)

    sp = sub.add_parser("mc", help="evaluate an E(U,X) formula")
    sp.add_argument("--model", required=True)
    sp.add_argument("--formula", required=True, help="formula file or inline formula text")
    sp.add_argument("--set", action="append", metavar="NAME=FILE",
                    help="register an atom (repeatable; NAME defaults to the file stem)")
    sp.add_argument("--store", help="answer yes/no for this store")
    output(sp)
    budget(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("member", help="membership of a store in an automaton file")
    sp.add_argument("--auto", required=True)
    sp.add_argument("--store", required=True)
    sp.set_defaults(func=cmd_member)

    sp = sub.add_parser("oracle", help="brute-force cross-check of a result")
    sp.add_argument("kind", choices=["prestar", "constrained"])
    sp.add_argument("--model", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--result", required=True)
    sp.add_argument("--constraint")
    sp.add_argument("--max-size", type=int, default=25)
    sp.add_argument("--max-depth", type=int, default=20)
    sp.add_argument("--max-start-size", type=int)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("export", help="Graphviz rendering of an automaton file")
    sp.add_argument("--auto", required=True)
    sp.add_argument("--dot")
    sp.add_argument("--flat", action="store_true", help="draw the flat automaton as written")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (HcfpError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())


def main_entry() -> None:
    sys.exit(main())
