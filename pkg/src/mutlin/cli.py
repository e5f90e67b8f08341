"""Command-line entry point.

Exit codes: 0 when the property holds (sat, empty, contained, equivalent),
1 when it fails, 2 for usage and input errors, 3 when a budget runs out.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import cpath, ctypes, gctl
from .formula import IllFormedFormula, ParseError, parse_formula, size, to_text
from .solver import (
    DEFAULT_MAX_ITERS,
    DEFAULT_MAX_NODES,
    BudgetExceeded,
    UnsupportedFormula,
    satisfiable,
)
from .trees import brute_force_sat, sat_on_tree

HOLDS, FAILS, USAGE, BUDGET = 0, 1, 2, 3

KINDS = ("formula", "cpath", "ctype", "gctl")
ALLOWED = {
    "sat": ("formula", "gctl"),
    "model": ("formula", "gctl"),
    "empty": ("formula", "cpath", "ctype", "gctl"),
    "contains": ("cpath", "ctype"),
    "equiv": ("cpath", "ctype"),
    "translate": KINDS,
    "oracle-check": ("formula",),
}
ARITY = {"contains": 2, "equiv": 2}

SYNTAX_ERRORS = (ParseError, cpath.CPathSyntaxError, ctypes.CTypeSyntaxError, gctl.GctlSyntaxError)
UNSUPPORTED = (IllFormedFormula, UnsupportedFormula, cpath.UnsupportedQuery, ctypes.UnsupportedType)

PARSERS = {
    "formula": parse_formula,
    "cpath": cpath.parse_cpath,
    "ctype": ctypes.parse_ctype,
    "gctl": gctl.parse_gctl,
}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mutlin", description="Tree logic with counting: satisfiability, "
                                 "query and type containment.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("sat", "decide satisfiability"),
        ("model", "decide satisfiability and print a witness tree"),
        ("empty", "decide emptiness of a query, type or formula"),
        ("contains", "decide whether the first input is contained in the second"),
        ("equiv", "decide equivalence of two inputs"),
        ("translate", "print the logic formula for an input"),
        ("oracle-check", "search all small trees for a witness"),
    ]:
        p = sub.add_parser(name, help=help_)
        kind = p.add_mutually_exclusive_group(required=True)
        kind.add_argument("-f", "--formula", nargs="+", metavar="F", help="formula text or file")
        kind.add_argument("--cpath", nargs="+", metavar="Q", help="CPath query text or file")
        kind.add_argument("--ctype", nargs="+", metavar="E", help="CTypes expression text or file")
        kind.add_argument("--gctl", nargs="+", metavar="G", help="GCTL formula text or file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES,
                       help=f"solver node budget (default {DEFAULT_MAX_NODES})")
        p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS,
                       help=f"solver iteration budget (default {DEFAULT_MAX_ITERS})")
        if name == "translate":
            p.add_argument("--negated", action="store_true",
                           help="print the translation of the complement (cpath, ctype)")
        if name == "oracle-check":
            p.add_argument("--bound", type=int, default=5, help="largest tree size tried (default 5)")
            p.add_argument("--compare", action="store_true", help="also run the solver and compare")
    return ap


def read_input(value: str) -> str:
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as fh:
            return fh.read().strip()
    return value


def _inputs(args):
    for kind in KINDS:
        vals = getattr(args, kind)
        if vals is not None:
            break
    if kind not in ALLOWED[args.command]:
        raise UsageError(f"{args.command} does not accept --{kind} input")
    want = ARITY.get(args.command, 1)
    if len(vals) != want:
        raise UsageError(f"{args.command} takes {want} input(s), got {len(vals)}")
    texts = [read_input(v) for v in vals]
    return kind, texts, [PARSERS[kind](t) for t in texts]


def _tree_out(t):
    return None if t is None else t.to_dict()


def _emit(args, payload: dict, lines: list):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _run(args) -> int:
    kind, texts, items = _inputs(args)
    opts = {"max_nodes": args.max_nodes, "max_iters": args.max_iters}
    cmd = args.command

    if cmd in ("sat", "model") or (cmd == "empty" and kind in ("formula", "gctl")):
        if kind == "gctl":
            v = gctl.gctl_satisfiable(items[0], **opts)
            sat, witness, stats = v.sat, v.witness, v.stats
        else:
            r = satisfiable(items[0], **opts)
            sat, witness, stats = r.sat, r.kripke, r.stats.as_dict()
        payload = {"verdict": "SAT" if sat else "UNSAT", "stats": stats}
        lines = ["SAT" if sat else "UNSAT"]
        if sat and cmd == "model":
            payload["witness"] = _tree_out(witness)
            payload["nodes"] = len(witness.labels)
            lines.append(f"witness with {len(witness.labels)} nodes:")
            lines.append(str(witness))
            lines.append(witness.to_json())
        if cmd == "empty":
            payload["verdict"] = "NONEMPTY" if sat else "EMPTY"
            lines = [payload["verdict"]]
            return _done(args, payload, lines, not sat)
        return _done(args, payload, lines, sat)

    if cmd == "translate":
        if kind == "formula":
            f = items[0]
        elif kind == "cpath":
            f = (cpath.translate_query_negated if args.negated else cpath.translate_query)(items[0])
        elif kind == "ctype":
            f = (ctypes.translate_type_negated if args.negated else ctypes.translate_type)(items[0])
        else:
            f = gctl.translate_gctl(items[0])
        _emit(args, {"formula": to_text(f), "size": size(f)}, [to_text(f)])
        return HOLDS

    if cmd == "oracle-check":
        f = items[0]
        t = brute_force_sat(f, args.bound)
        payload = {"verdict": "FOUND" if t is not None else "NONE", "bound": args.bound,
                   "witness": _tree_out(t)}
        lines = [f"witness within {args.bound} nodes:" if t is not None else
                 f"no witness within {args.bound} nodes"]
        if t is not None:
            lines.append(str(t))
        if args.compare:
            r = satisfiable(f, **opts)
            ok = r.sat if t is not None else True
            if r.sat and not sat_on_tree(f, r.kripke):
                ok = False
            payload["solver"] = "SAT" if r.sat else "UNSAT"
            payload["agree"] = ok
            lines.append(f"solver: {payload['solver']} ({'agrees' if ok else 'DISAGREES'})")
            if not ok:
                _emit(args, payload, lines)
                return FAILS
        return _done(args, payload, lines, t is not None)

    if cmd == "empty":
        v = (cpath.query_empty if kind == "cpath" else ctypes.type_empty)(items[0], **opts)
        word = "EMPTY" if v.holds else "NONEMPTY"
    elif cmd == "contains":
        v = (cpath.query_contained if kind == "cpath" else ctypes.type_contained)(*items, **opts)
        word = "CONTAINED" if v.holds else "NOT CONTAINED"
    else:
        v = (cpath.query_equiv if kind == "cpath" else ctypes.type_equiv)(*items, **opts)
        word = "EQUIVALENT" if v.holds else "NOT EQUIVALENT"
    payload = {"verdict": word, "stats": v.stats}
    lines = [word]
    if not v.holds:
        if getattr(v, "empty_forest", False):
            payload["counterexample"] = None
            payload["empty_forest"] = True
            lines.append("counterexample: the empty forest")
        else:
            payload["counterexample"] = _tree_out(v.counterexample)
            lines.append("counterexample:")
            lines.append(str(v.counterexample))
    return _done(args, payload, lines, v.holds)


def _done(args, payload, lines, holds) -> int:
    _emit(args, payload, lines)
    return HOLDS if holds else FAILS


def _caret(text, pos):
    line_start = text.rfind("\n", 0, pos) + 1
    line_end = text.find("\n", pos)
    line = text[line_start: None if line_end < 0 else line_end]
    return f"  {line}\n  {' ' * (pos - line_start)}^"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except UsageError as e:
        print(f"mutlin: error: {e}", file=sys.stderr)
        return USAGE
    except SYNTAX_ERRORS as e:
        print(f"mutlin: syntax error: {e}", file=sys.stderr)
        if getattr(e, "text", None) is not None:
            print(_caret(e.text, e.pos), file=sys.stderr)
        return USAGE
    except UNSUPPORTED as e:
        print(f"mutlin: unsupported input: {e}", file=sys.stderr)
        return USAGE
    except BudgetExceeded as e:
        print(f"mutlin: budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    except OSError as e:
        print(f"mutlin: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
