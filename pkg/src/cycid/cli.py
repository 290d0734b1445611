"""Command-line front end.

Exit codes: 0 ok, 1 check failed, 2 usage or parse error, 3 bound-limited
result under --strict-exact.  Output is plain tab-separated text.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .calculus import CYCLIC, FINITARY
from .grammar import ParseError, parse_decls, parse_formula, show_formula
from .library import standard_env
from .proofs import as_graph, check_proof, parse_proof, proof_mode, serialize_proof
from .syntax import SyntaxError_

OK, FAILED, USAGE, INEXACT = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _out(*cols):
    print("\t".join(str(c) for c in cols))


def _env(args):
    env = standard_env()
    if getattr(args, "decls", None):
        env = parse_decls(_read(args.decls), env)
    return env


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _Usage(f"cannot read {path}: {e.strerror}") from None


def _load(path, env):
    return parse_proof(_read(path), env)


def _assignment(items) -> dict:
    rho = {}
    for item in items or ():
        for part in item.split(","):
            if not part:
                continue
            name, eq, val = part.partition("=")
            if not eq or not val.strip().isdigit():
                raise _Usage(f"bad assignment {part!r}, expected var=number")
            rho[name.strip()] = int(val)
    return rho


def _report_verdict(v):
    if v is None:
        return
    if v.progressing:
        _out("progress", "Progressing", f"witnesses={len(v.witnesses)}",
             f"closure={v.closure_size}")
        for w in v.witnesses[:1]:
            _out("witness", "cycle=" + ",".join(w.nodes),
                 "trace=" + " ; ".join(show_formula(f) for f in w.formulas))
    else:
        _out("progress", "Violation",
             "stem=" + ",".join(u for u, _, _ in v.stem),
             "cycle=" + ",".join(u for u, _, _ in v.cycle))


def cmd_check(args) -> int:
    p = _load(args.path, _env(args))
    mode = args.mode or proof_mode(p)
    report = check_proof(p, mode=mode, allow_open=args.allow_open)
    for label, tag, err in report.errors:
        _out("error", label, tag, type(err).__name__, str(err))
    if report.errors:
        _out("result", "failed", f"errors={len(report.errors)}")
        return FAILED
    _report_verdict(report.verdict)
    if report.verdict is not None and not report.verdict.progressing:
        _out("result", "preproof")
        return FAILED if args.require_progress else OK
    _out("result", "proof", mode)
    return OK


def cmd_translate(args) -> int:
    from .translate import id_to_cid
    p = _load(args.input, _env(args))
    if proof_mode(p) != FINITARY:
        raise _Usage("translate expects a finitary proof")
    report = check_proof(p, mode=FINITARY)
    for label, tag, err in report.errors:
        _out("error", label, tag, type(err).__name__, str(err))
    if report.errors:
        return FAILED
    q = id_to_cid(p)
    out = check_proof(q, mode=CYCLIC)
    for label, tag, err in out.errors:
        _out("error", label, tag, type(err).__name__, str(err))
    text = serialize_proof(q)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _out("translated", f"nodes={len(q)}", "progressing" if out.ok else "not-progressing")
    return OK if out.ok else FAILED


def cmd_eval(args) -> int:
    from .semantics import Model, UnassignedVariable
    env = _env(args)
    f = parse_formula(args.formula, env)
    model = Model(args.bound)
    try:
        value, exact = model.eval(f, _assignment(args.assign))
    except UnassignedVariable as e:
        raise _Usage(f"variable {e} has no value; pass --assign {e}=N") from None
    _out(str(value).lower(), "exact" if exact else "bound-limited")
    return INEXACT if args.strict_exact and not exact else OK


def _lookup_pred(env, name):
    if name in env:
        return env[name]
    if name.upper() in env:
        return env[name.upper()]
    raise _Usage(f"unknown inductive predicate {name!r}")


def cmd_profile(args) -> int:
    from .semantics import Model, closure_profile
    env = _env(args)
    pred = _lookup_pred(env, args.pred)
    model = Model(args.bound)
    _out("stage", "entered")
    for k, new in closure_profile(pred, model.universe, model):
        _out(k, ",".join(map(str, sorted(new))))
    t = model.table(pred)
    exact = all(m in t.exact for m in model.universe.elements)
    _out("fixpoint", ",".join(map(str, sorted(t.fixpoint))), "exact" if exact else "bound-limited")
    return INEXACT if args.strict_exact and not exact else OK


def cmd_countermodel(args) -> int:
    from .semantics import BoundLimited, Model, RootNotFalse, countermodel_walk
    p = as_graph(_load(args.proof, _env(args)))
    model = Model(args.bound)
    try:
        res = countermodel_walk(p, _assignment(args.assign), model, args.max_steps)
    except RootNotFalse as e:
        _out("verdict", "RootNotFalse", str(e))
        return FAILED
    except BoundLimited as e:
        _out("verdict", "BoundLimited", str(e))
        return INEXACT if args.strict_exact else FAILED
    _out("step", "node", "assignment", "stages")
    for i, s in enumerate(res.steps):
        rho = ",".join(f"{k}={v}" for k, v in s.assignment)
        st = "; ".join(f"{show_formula(f)}@{k}" for f, k in s.stages)
        _out(i, s.node, rho or "-", st or "-")
    _out("verdict", res.verdict, f"loop_start={res.loop_start}",
         f"increases={len(res.increases)}", f"decreases={len(res.decreases)}")
    return OK


def cmd_dump(args) -> int:
    from .trace import all_edge_graphs
    p = as_graph(_load(args.path, _env(args)))
    _out("source", "target", "premiss", "edges")
    for u, i, v, g in all_edge_graphs(p):
        edges = sorted(f"{show_formula(a)} -> {show_formula(b)}{' *' if prog else ''}"
                       for a, b, prog in g.edges)
        _out(u, v, i, " ; ".join(edges) or "-")
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cycid", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--decls", help="file of extra 'ind NAME := (X, x, body)' lines")

    c = sub.add_parser("check", help="check a proof file")
    c.add_argument("path")
    c.add_argument("--mode", choices=[FINITARY, CYCLIC])
    c.add_argument("--require-progress", action="store_true")
    c.add_argument("--allow-open", action="store_true", help="accept hypothesis leaves")
    common(c)
    c.set_defaults(fn=cmd_check)

    t = sub.add_parser("translate", help="compile a finitary proof into a cyclic one")
    t.add_argument("input")
    t.add_argument("-o", "--output")
    common(t)
    t.set_defaults(fn=cmd_translate)

    e = sub.add_parser("eval", help="evaluate a formula on {0..B}")
    e.add_argument("--bound", type=int, required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--assign", action="append", help="x=3 (repeatable, or comma separated)")
    e.add_argument("--strict-exact", action="store_true")
    common(e)
    e.set_defaults(fn=cmd_eval)

    pr = sub.add_parser("profile", help="approximant entry stages of a predicate")
    pr.add_argument("--bound", type=int, required=True)
    pr.add_argument("--pred", required=True)
    pr.add_argument("--strict-exact", action="store_true")
    common(pr)
    pr.set_defaults(fn=cmd_profile)

    cm = sub.add_parser("countermodel", help="walk a falsified branch of a preproof")
    cm.add_argument("--bound", type=int, required=True)
    cm.add_argument("--proof", required=True)
    cm.add_argument("--assign", action="append")
    cm.add_argument("--max-steps", type=int, default=1000)
    cm.add_argument("--strict-exact", action="store_true")
    common(cm)
    cm.set_defaults(fn=cmd_countermodel)

    d = sub.add_parser("dump-trace-graphs", help="print the trace graph of every edge")
    d.add_argument("path")
    common(d)
    d.set_defaults(fn=cmd_dump)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    if getattr(args, "bound", 0) is not None and getattr(args, "bound", 0) < 0:
        print("error: --bound must be >= 0", file=sys.stderr)
        return USAGE
    try:
        return args.fn(args)
    except (_Usage, ParseError, SyntaxError_) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
