"""Command line driver.

Exit codes: 0 when everything checks, 1 when a diagnostic was reported,
2 on usage errors (bad flags, unreadable files, unknown definitions).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from covertt import conversion, coverage, crosscheck, oracle
from covertt.diagnostics import Diagnostic, from_exception
from covertt.parser import Elaborated, ParseError, ScopeError, elaborate, elaborate_term, parse, parse_term
from covertt.pretty import show
from covertt.syntax import EMPTY, App, Def
from covertt.typechecker import TypeCheckError, check_signature, infer


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=int, default=argparse.SUPPRESS, help="reduction step bound (default: $COVERTT_FUEL or 100000)")

    p = argparse.ArgumentParser(prog="covertt", description="Check, cover and evaluate .ctt files.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="check every declaration and match")
    c.add_argument("file")

    e = sub.add_parser("eval", parents=[common], help="normalise a definition, optionally applied to arguments")
    e.add_argument("file")
    e.add_argument("--def", dest="name", required=True)
    e.add_argument("--args", nargs="*", default=[], help="argument terms in surface syntax")

    v = sub.add_parser("cover", parents=[common], help="print the cover tree of each match in a definition")
    v.add_argument("file")
    v.add_argument("--def", dest="name", required=True)
    v.add_argument("--explain", action="store_true", help="print the full derivation")
    v.add_argument("--json", action="store_true", help="machine-readable output")

    o = sub.add_parser("oracle", parents=[common], help="validate covers and evaluation in the finite set model")
    o.add_argument("file")
    o.add_argument("--def", dest="name")
    o.add_argument("--depth", type=int, default=3)
    o.add_argument("--max-fun", type=int, default=64)
    o.add_argument("--json", action="store_true")
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _report(diag: Diagnostic, text: str, path: str) -> int:
    print(diag.format(text, path), file=sys.stderr)
    return 1


def _require_def(el: Elaborated, name: str) -> None:
    if not el.sig.has_def(name):
        raise UsageError(f"no definition named {name}")


def _cmd_check(args, text: str, el: Elaborated) -> int:
    report = check_signature(el.sig)
    n_defs = sum(1 for d in report.decls if d.kind == "def")
    n_data = sum(1 for d in report.decls if d.kind == "data")
    line = f"ok: {n_data} datatypes, {n_defs} definitions"
    if report.recursive():
        line += f" (recursive, unchecked for termination: {', '.join(report.recursive())})"
    print(line)
    return 0


def _cmd_eval(args, text: str, el: Elaborated) -> int:
    _require_def(el, args.name)
    check_signature(el.sig)
    term = Def(args.name)
    for a in args.args:
        try:
            surface = parse_term(a)
        except ParseError as e:
            raise UsageError(f"cannot parse argument {a!r}: {e.message}") from None
        term = App(term, elaborate_term(surface, el.sig))
    infer(el.sig, EMPTY, term)
    print(show(conversion.normalize(el.sig, term), (), el.sig))
    return 0


def _cmd_cover(args, text: str, el: Elaborated) -> int:
    _require_def(el, args.name)
    check_signature(el.sig)
    trees = []
    for m in crosscheck.matches_of(el.sig.definition(args.name).body):
        trees.append(coverage.check_cover(el.sig, m.tel, [(b.tel, b.pattern) for b in m.branches]))
    if args.json:
        print(json.dumps({"def": args.name, "covers": [coverage.to_json(t, el.sig) for t in trees]}, indent=2))
        return 0
    for k, t in enumerate(trees):
        n_leaves = len(coverage.leaves(t))
        print(f"match {k}: covered by {n_leaves} {'leaf' if n_leaves == 1 else 'leaves'}")
        if args.explain:
            print(coverage.render(t, el.sig, 1))
    return 0


def _cmd_oracle(args, text: str, el: Elaborated) -> int:
    check_signature(el.sig)
    if args.name is not None:
        _require_def(el, args.name)
        names = [args.name]
    else:
        names = [n for n, _ in el.sig.defs]
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    bound = oracle.Bound(max_depth=args.depth, max_fun=args.max_fun)
    reports = crosscheck.sweep(el.sig, names, bound)
    ok = True
    rows = []
    for r in reports:
        good = r.cover.ok and r.agreement.ok and r.absurd_inhabited == 0
        ok = ok and good
        rows.append(
            {
                "def": r.definition,
                "match": r.index,
                "covering": r.cover.covering,
                "disjoint": r.cover.disjoint,
                "environments": r.cover.environments,
                "counterexamples": [[oracle.show_value(v) for v in e] for e in r.cover.counterexamples],
                "absurd_inhabitants": r.absurd_inhabited,
                "evaluation_agreed": r.agreement.agreed,
                "evaluation_checked": r.agreement.checked,
                "evaluation_skipped": r.agreement.skipped,
            }
        )
    if args.json:
        print(json.dumps({"depth": args.depth, "matches": rows}, indent=2))
    else:
        for row in rows:
            print(
                f"{row['def']} match {row['match']}: covering={str(row['covering']).lower()} "
                f"disjoint={str(row['disjoint']).lower()} environments={row['environments']} "
                f"counterexamples={len(row['counterexamples'])} "
                f"evaluation={row['evaluation_agreed']}/{row['evaluation_checked']}"
                + (f" (skipped {row['evaluation_skipped']})" if row["evaluation_skipped"] else "")
            )
        if not rows:
            print("no matches to check")
    return 0 if ok else 1


COMMANDS = {"check": _cmd_check, "eval": _cmd_eval, "cover": _cmd_cover, "oracle": _cmd_oracle}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    fuel = getattr(args, "fuel", None)
    if fuel is None:
        fuel = conversion.fuel_from_env()
    saved = conversion.DEFAULT_FUEL
    if fuel is not None:
        conversion.set_default_fuel(fuel)
    try:
        return _run(args)
    finally:
        conversion.set_default_fuel(saved)


def _run(args) -> int:
    text = ""
    el = None
    try:
        text = _read(args.file)
        el = elaborate(parse(text))
        return COMMANDS[args.command](args, text, el)
    except UsageError as e:
        print(f"covertt: {e}", file=sys.stderr)
        return 2
    except (ParseError, ScopeError, TypeCheckError, coverage.CoverageError, conversion.FuelExhausted) as e:
        return _report(from_exception(e, el.spans if el else None), text, args.file)
    except oracle.OracleError as e:
        print(f"{args.file}: error[{type(e).__name__}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
