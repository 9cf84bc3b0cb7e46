"""Run schedules of dense goals and tactics, recording one report entry per step."""

from __future__ import annotations

import json
from pathlib import Path

from ._common import ForcelabError, FormatError, Policy, derive_seed
from .fileformat import Report, Scenario, read
from .fposet import (
    FAmbient,
    FCondition,
    f_add_pair,
    f_extends,
    f_limit_lower_bound,
    f_mirror_amalgamate,
    f_raise,
    identity_condition,
    max_fiber_size,
    validate_ambient,
    validate_fcondition,
)
from .hposet import (
    HCondition,
    HeightAbove,
    IndexIn,
    add_branch_index,
    assemble_generic,
    condition_diagnostics,
    extend_height,
    extends,
    limit_lower_bound,
    meets,
    trivial_condition,
    validate_condition,
)
from .lextree import lex_compare_branches, validate_family

EXIT_OK, EXIT_VIOLATIONS, EXIT_INPUT = 0, 1, 2


class InputError(FormatError):
    pass


def _resolve(ref, base: Path, expected: type):
    if ref is None:
        return None
    value = ref
    if isinstance(ref, str):
        path = (base / ref) if not Path(ref).is_absolute() else Path(ref)
        if not path.exists():
            raise InputError(f"unresolvable reference {ref!r}")
        value = read(path)
    if not isinstance(value, expected):
        raise InputError(f"reference {ref!r} is a {type(value).__name__}, expected {expected.__name__}")
    return value


def _jsonable(x):
    return json.loads(json.dumps(x, sort_keys=True, default=str))


def _records(violations):
    return [v.to_record() for v in violations]


def run_scenario(
    scn: Scenario,
    base_dir=".",
    seed: int | None = None,
    fanout: int = 2,
    max_height: int | None = None,
    sink: list | None = None,
) -> Report:
    """Execute a schedule. If `sink` is a list, every condition of the run is appended to it."""
    base = Path(base_dir)
    seed = scn.seed if seed is None else seed
    seed = 0 if seed is None else seed
    if not scn.schedule:
        raise InputError("schedule must be nonempty")
    if scn.poset == "h":
        steps, final, status = _run_h(scn, base, seed, fanout, max_height, sink)
    elif scn.poset == "f":
        steps, final, status = _run_f(scn, base, seed, max_height, sink)
    else:
        raise InputError(f"unknown poset kind {scn.poset!r}")
    return Report(scn.poset, seed, tuple(_jsonable(s) for s in steps), _jsonable(final), status, scn.name)


def _step_policy(args, fanout, seed, i) -> Policy:
    return Policy(int(args.get("fanout", fanout)), derive_seed(seed, "step", i))


def _run_h(scn, base, seed, fanout, max_height, sink):
    q = _resolve(scn.initial, base, HCondition) or trivial_condition(scn.club)
    run = sink if sink is not None else []
    run.append(q)
    steps = []
    status = EXIT_OK
    for i, step in enumerate(scn.schedule):
        a = step.args
        prev = run[-1]
        record = {"step": i, "op": step.op, "args": a}
        try:
            policy = _step_policy(a, fanout, seed, i)
            if step.op == "height-above":
                goal = HeightAbove(int(a["alpha"]))
                q = prev if meets(prev, goal) else extend_height(prev, goal.alpha + 1, policy)
            elif step.op == "index-in":
                goal = IndexIn(int(a["index"]))
                q = prev if meets(prev, goal) else add_branch_index(prev, goal.index, policy)
            elif step.op == "extend-height":
                q = extend_height(prev, int(a["target"]), policy)
            elif step.op == "add-branch":
                q = add_branch_index(prev, int(a["index"]), policy)
            elif step.op == "limit":
                q = limit_lower_bound(_distinct(run))
            else:
                raise InputError(f"unknown op {step.op!r} for poset h")
            if max_height is not None and q.alpha > max_height:
                raise ForcelabError(f"alpha {q.alpha} exceeds --max-height {max_height}")
        except InputError:
            raise
        except (ForcelabError, KeyError, ValueError) as exc:
            record.update(status="error", error=str(exc), violations=[])
            steps.append(record)
            return steps, {"stopped_at": i}, EXIT_VIOLATIONS
        violations = []
        if "validate" in scn.checks:
            violations += validate_condition(q)
        if "extends" in scn.checks:
            violations += extends(q, prev, validate=False)
        if "family" in scn.checks:
            violations += validate_family(q.tree, q.family, complete=True)
        record.update(
            status="violations" if violations else "ok",
            violations=_records(violations),
            diagnostics=condition_diagnostics(q),
        )
        if violations:
            status = EXIT_VIOLATIONS
        steps.append(record)
        run.append(q)
    return steps, _h_final(_distinct(run)), status


def _distinct(run):
    out = []
    for c in run:
        if not out or c is not out[-1]:
            out.append(c)
    return out


def _h_final(run) -> dict:
    g = assemble_generic(run)
    order = sorted(g.branches)
    # insertion sort by the branch order; small and keeps the comparator explicit
    ranked: list[int] = []
    for xi in order:
        k = 0
        while k < len(ranked) and lex_compare_branches(g.branches[ranked[k]], g.branches[xi], g.tree) < 0:
            k += 1
        ranked.insert(k, xi)
    family_violations = validate_family(g.tree, g.family, complete=True)
    return {
        "tree": {"height": g.tree.height, "level_sizes": [len(level) for level in g.tree.levels]},
        "branch_count": len(g.branches),
        "branches": {str(xi): b.nodes[-1] for xi, b in sorted(g.branches.items())},
        "lex_order": ranked,
        "family": {"pairs": len(g.family.maps), "violations": len(family_violations)},
    }


def _run_f(scn, base, seed, max_height, sink):
    amb = _resolve(scn.ambient, base, FAmbient)
    if amb is None:
        raise InputError("an f scenario needs an ambient")
    bad = validate_ambient(amb)
    if bad:
        raise InputError(f"invalid ambient: {bad[0]}")
    p = _resolve(scn.initial, base, FCondition) or identity_condition(amb, [0])
    run = sink if sink is not None else []
    run.append(p)
    steps = []
    status = EXIT_OK
    for i, step in enumerate(scn.schedule):
        a = step.args
        prev = run[-1]
        record = {"step": i, "op": step.op, "args": a}
        try:
            if step.op == "add-phi":
                q = f_add_pair(amb, prev, int(a["from"]), int(a["to"]))
            elif step.op == "raise":
                q = f_raise(amb, prev, int(a["height"]))
            elif step.op == "limit":
                q = f_limit_lower_bound(amb, run, int(a["delta"]))
            elif step.op == "mirror":
                h = {int(x): int(y) for x, y in a.get("h", [])}
                q = f_mirror_amalgamate(amb, run, h, int(a["delta"]))
            else:
                raise InputError(f"unknown op {step.op!r} for poset f")
            if max_height is not None and q.alpha > max_height:
                raise ForcelabError(f"alpha {q.alpha} exceeds --max-height {max_height}")
        except InputError:
            raise
        except (ForcelabError, KeyError, ValueError) as exc:
            record.update(status="error", error=str(exc), violations=[])
            steps.append(record)
            return steps, {"stopped_at": i}, EXIT_VIOLATIONS
        violations = []
        if "validate" in scn.checks:
            violations += validate_fcondition(amb, q)
        if "extends" in scn.checks:
            violations += f_extends(q, prev)
        record.update(
            status="violations" if violations else "ok",
            violations=_records(violations),
            diagnostics={"alpha": q.alpha, "phi_size": len(q.phi), "max_fiber": max_fiber_size(amb, q)},
        )
        if violations:
            status = EXIT_VIOLATIONS
        steps.append(record)
        run.append(q)
    last = run[-1]
    final = {
        "alpha": last.alpha,
        "A": list(last.A),
        "phi_size": len(last.phi),
        "phi": [[x, y] for x, y in sorted(last.phi.items())],
        "max_fiber": max_fiber_size(amb, last),
    }
    return steps, final, status


def render_human(report: Report) -> str:
    lines = [f"scenario {report.name or '-'}  poset={report.poset}  seed={report.seed}  status={report.status}"]
    for s in report.steps:
        diag = s.get("diagnostics", {})
        extra = ", ".join(f"{k}={diag[k]}" for k in sorted(diag) if k != "level_sizes")
        lines.append(f"  [{s['step']}] {s['op']} {json.dumps(s['args'], sort_keys=True)} -> {s['status']}"
                     + (f" ({extra})" if extra else ""))
        for v in s.get("violations", []):
            lines.append(f"      {v['clause']} {v['kind']}: {v['message']}")
        if "error" in s:
            lines.append(f"      error: {s['error']}")
    lines.append("final: " + json.dumps(report.final, sort_keys=True))
    return "\n".join(lines) + "\n"
