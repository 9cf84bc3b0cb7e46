"""Command-line harness: validate files, apply tactics, run schedules, print reports."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from ._common import ForcelabError, FormatError, Policy, parse_rational
from .capture import CaptureSet, gamma_members, in_omega, in_omega_tree
from .fileformat import SCHEMA, Report, Scenario, TermFile, dumps, from_record, load_record, read
from .fposet import FAmbient, FCondition, f_extends, max_fiber_size, validate_ambient, validate_fcondition
from .hposet import (
    HCondition,
    add_branch_index,
    condition_diagnostics,
    delta_system,
    extend_height,
    extends,
    validate_condition,
)
from .lextree import LexTree, validate_tree
from .order import LadderOrder, LinOrder, hausdorff_rank, is_scattered, parse_term
from .pposet import PAmbient, PCondition, p_extends, validate_pcondition
from .scenario import EXIT_INPUT, EXIT_OK, EXIT_VIOLATIONS, render_human, run_scenario

ENV_SEED = "FORCELAB_SEED"


def resolve_seed(flag: int | None, scenario_seed: int | None = None) -> int:
    """--seed wins, then the scenario's own seed, then $FORCELAB_SEED, then 0."""
    if flag is not None:
        return flag
    if scenario_seed is not None:
        return scenario_seed
    env = os.environ.get(ENV_SEED)
    if env:
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"{ENV_SEED}={env!r} is not a natural number") from None
    return 0


def _nat(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"{text} is not a natural number")
    return n


def _emit(args, payload: dict, human: str) -> None:
    text = json.dumps({"schema": SCHEMA, **payload}, sort_keys=True, indent=2) + "\n"
    if args.format == "human":
        text = human if human.endswith("\n") else human + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _violation_lines(records) -> str:
    if not records:
        return "ok: no violations"
    return "\n".join(f"{r['clause']} {r['kind']} {r['witnesses']}: {r['message']}" for r in records)


# -- loading ----------------------------------------------------------------------


def _load_with_ambient(path: Path):
    """Read a file; fcondition and pcondition files also carry an `ambient` (inline or path)."""
    rec = load_record(path.read_text()) if path.exists() else None
    if rec is None:
        raise FormatError(f"cannot read {path}")
    value = from_record(rec)
    amb = None
    if isinstance(value, (FCondition, PCondition)):
        ref = rec.get("ambient")
        if ref is None:
            raise FormatError(f"{rec['kind']} file needs an 'ambient' field")
        if isinstance(ref, str):
            amb = read(path.parent / ref)
        else:
            amb = from_record(ref)
        want = FAmbient if isinstance(value, FCondition) else PAmbient
        if not isinstance(amb, want):
            raise FormatError(f"ambient is a {type(amb).__name__}, expected {want.__name__}")
    return value, amb


def check_value(value, amb=None, max_fiber: int | None = None, allow_closure: bool = False):
    """Violations and diagnostics for any loadable value."""
    diag: dict = {}
    if isinstance(value, HCondition):
        out = validate_condition(value)
        diag = condition_diagnostics(value)
    elif isinstance(value, LexTree):
        out = validate_tree(value)
        diag = {"height": value.height, "level_sizes": [len(level) for level in value.levels]}
    elif isinstance(value, FCondition):
        bad = validate_ambient(amb)
        if bad:
            raise FormatError(f"invalid ambient: {bad[0]}")
        out = validate_fcondition(amb, value, max_fiber)
        diag = {"alpha": value.alpha if value.A else None, "phi_size": len(value.phi)}
        if not out:
            diag["max_fiber"] = max_fiber_size(amb, value)
    elif isinstance(value, PCondition):
        if allow_closure:
            amb = dataclasses.replace(amb, allow_closure_branches=True)
        out = validate_pcondition(amb, value)
        diag = {"alpha": value.alpha}
    elif isinstance(value, LadderOrder):
        return [], {"problems": value.violations()}
    elif isinstance(value, (LinOrder, TermFile, CaptureSet)):
        out = []
    else:
        raise FormatError(f"nothing to validate in a {type(value).__name__}")
    return out, diag


# -- subcommands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    value, amb = _load_with_ambient(Path(args.file))
    out, diag = check_value(value, amb, args.max_fiber, args.allow_closure_branches)
    records = [v.to_record() for v in out]
    problems = diag.get("problems", [])
    status = EXIT_VIOLATIONS if records or problems else EXIT_OK
    human = _violation_lines(records)
    if problems:
        human = "\n".join(problems)
    _emit(args, {"kind": "validation", "violations": records, "diagnostics": diag, "status": status}, human)
    return status


def cmd_extend(args) -> int:
    p, amb = _load_with_ambient(Path(args.file))
    if args.against:
        q, _ = _load_with_ambient(Path(args.against))
        if type(q) is not type(p):
            raise FormatError("both files must hold conditions of the same kind")
        if isinstance(p, HCondition):
            out = extends(q, p)
        elif isinstance(p, FCondition):
            out = f_extends(q, p)
        elif isinstance(p, PCondition):
            out = p_extends(q, p)
        else:
            raise FormatError(f"no extension relation for {type(p).__name__}")
        records = [v.to_record() for v in out]
        status = EXIT_VIOLATIONS if records else EXIT_OK
        _emit(args, {"kind": "extension", "violations": records, "status": status}, _violation_lines(records))
        return status
    if not isinstance(p, HCondition):
        raise FormatError("tactics apply to hcondition files; use --against to compare other kinds")
    seed = resolve_seed(args.seed)
    policy = Policy(args.fanout, seed)
    q = p
    try:
        if args.target is not None:
            q = extend_height(q, args.target, policy.child("height"))
        for xi in args.index or []:
            q = add_branch_index(q, xi, policy.child("index", xi))
    except ForcelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS
    out = validate_condition(q) + extends(q, p, validate=False)
    text = dumps(q)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for v in out:
        print(str(v), file=sys.stderr)
    return EXIT_VIOLATIONS if out else EXIT_OK


def cmd_run(args) -> int:
    path = Path(args.file)
    scn = read(path)
    if not isinstance(scn, Scenario):
        raise FormatError(f"{path} is not a scenario")
    seed = resolve_seed(args.seed, scn.seed)
    report = run_scenario(scn, path.parent, seed=seed, fanout=args.fanout, max_height=args.max_height)
    text = dumps(report) if args.format == "structured" else render_human(report)
    if args.output:
        Path(args.output).write_text(dumps(report))
        if args.format == "human":
            sys.stdout.write(text)
    else:
        sys.stdout.write(text)
    return report.status


def cmd_report(args) -> int:
    report = read(Path(args.file))
    if not isinstance(report, Report):
        raise FormatError(f"{args.file} is not a report")
    text = dumps(report) if args.format == "structured" else render_human(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _domains(path: Path) -> list[list[int]]:
    rec = load_record(path.read_text())
    if rec.get("kind") == "domains":
        return [sorted(int(i) for i in d) for d in rec["domains"]]
    if rec.get("kind") == "conditions":
        return [sorted(read(path.parent / ref).dom) for ref in rec["files"]]
    raise FormatError("expected a 'domains' or 'conditions' record")


def cmd_delta_system(args) -> int:
    domains = _domains(Path(args.file))
    ds = delta_system(domains)
    payload = {
        "kind": "delta-system",
        "root": sorted(ds.root),
        "positions": list(ds.positions),
        "exhaustive": ds.exhaustive,
    }
    human = f"root {sorted(ds.root)}  members {list(ds.positions)}  exhaustive={ds.exhaustive}"
    _emit(args, payload, human)
    return EXIT_OK


def cmd_capture(args) -> int:
    Z = read(args.set) if args.set else None
    if Z is not None and not isinstance(Z, CaptureSet):
        raise FormatError(f"{args.set} is not a captureset")
    if args.tree:
        T = read(args.tree)
        if not isinstance(T, LexTree) or Z is None:
            raise FormatError("--tree needs a tree file and --set")
        ok = in_omega_tree(Z, T)
        _emit(args, {"kind": "capture", "in_omega_tree": ok}, f"in_omega_tree: {ok}")
        return EXIT_OK
    L = read(args.order)
    if not isinstance(L, LinOrder):
        raise FormatError(f"{args.order} is not a linorder")
    if args.universe is not None:
        universe = [parse_rational(u) for u in args.universe.split(",") if u.strip()]
        members = gamma_members(L, universe, args.k)
        rendered = [[str(Fraction(q)) for q in sorted(m)] for m in members]
        _emit(args, {"kind": "gamma", "k": args.k, "members": rendered},
              "\n".join(" ".join(m) for m in rendered) or "(none)")
        return EXIT_OK
    if Z is None:
        raise FormatError("capture needs --set, --universe, or --tree")
    ok = in_omega(Z, L)
    _emit(args, {"kind": "capture", "in_omega": ok}, f"in_omega: {ok}")
    return EXIT_OK


def cmd_rank(args) -> int:
    p = Path(args.term)
    term = read(p).term if p.suffix == ".json" and p.exists() else parse_term(args.term)
    scattered = is_scattered(term)
    rank = hausdorff_rank(term) if scattered else None
    _emit(args, {"kind": "rank", "scattered": scattered, "rank": rank},
          f"scattered: {scattered}" + (f"  rank: {rank}" if scattered else ""))
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nat, default=None, help=f"random seed (fallback: ${ENV_SEED}, then 0)")
    common.add_argument("--fanout", type=_nat, default=2)
    common.add_argument("--max-height", type=_nat, default=None)
    common.add_argument("--format", choices=("human", "structured"), default="human")
    common.add_argument("--allow-closure-branches", action="store_true")
    common.add_argument("-o", "--output", default=None)

    ap = argparse.ArgumentParser(prog="forcelab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="validate a condition file")
    v.add_argument("file")
    v.add_argument("--max-fiber", type=_nat, default=None)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("extend", parents=[common], help="apply tactics, or check q extends p")
    e.add_argument("file")
    e.add_argument("--target", type=_nat, default=None, help="grow the tree to this alpha")
    e.add_argument("--index", type=_nat, action="append", help="add a branch index (repeatable)")
    e.add_argument("--against", default=None, help="check that this file extends FILE")
    e.set_defaults(func=cmd_extend)

    r = sub.add_parser("run", parents=[common], help="execute a scenario")
    r.add_argument("file")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("delta-system", parents=[common], help="extract a delta-system")
    d.add_argument("file")
    d.set_defaults(func=cmd_delta_system)

    c = sub.add_parser("capture", parents=[common], help="capture checks on orders and trees")
    c.add_argument("--order", default=None)
    c.add_argument("--set", default=None)
    c.add_argument("--tree", default=None)
    c.add_argument("--universe", default=None, help="comma-separated rationals")
    c.add_argument("-k", type=_nat, default=1)
    c.set_defaults(func=cmd_capture)

    k = sub.add_parser("rank", parents=[common], help="scatteredness and Hausdorff rank of a term")
    k.add_argument("term", help="term text such as 'wsum(fin(1))' or an orderterm file")
    k.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", parents=[common], help="render a saved run report")
    p.add_argument("file")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ForcelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS


if __name__ == "__main__":
    sys.exit(main())
