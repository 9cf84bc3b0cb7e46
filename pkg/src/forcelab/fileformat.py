"""The repository condition file format.

Every file is a JSON object with a mandatory ``schema`` field and a ``kind``.
Rationals are "num/den" strings, ids are strings, sets are sorted lists.
Nested values are records with a ``kind`` but no schema field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ._common import FormatError, format_rational, parse_rational
from .capture import CaptureSet, TraceWindow
from .fposet import FAmbient, FCondition
from .hposet import HCondition
from .lextree import Branch, IsoFamily, LexTree, Node
from .order import LadderOrder, LinOrder, format_term, parse_term
from .pposet import PAmbient, PCondition

SCHEMA = "forcelab/1"


@dataclass(frozen=True)
class Step:
    op: str
    args: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    """A schedule of goals/tactics. `ambient` and `initial` are inline values, file refs, or None."""

    poset: str
    schedule: tuple[Step, ...]
    checks: tuple[str, ...] = ("validate",)
    seed: int | None = None
    ambient: Any = None
    initial: Any = None
    club: tuple[int, ...] = ()
    name: str = ""


@dataclass(frozen=True)
class Report:
    poset: str
    seed: int
    steps: tuple[dict, ...]
    final: dict
    status: int
    name: str = ""


@dataclass(frozen=True)
class TermFile:
    term: Any


def _rat(q) -> str:
    return format_rational(q)


def _pairs(mapping) -> list:
    return [[k, v] for k, v in sorted(mapping.items())]


def to_record(value) -> dict:
    if isinstance(value, LinOrder):
        return {"kind": "linorder", "elements": [[e, _rat(p)] for e, p in value.elements]}
    if isinstance(value, LadderOrder):
        return {"kind": "ladder", "ladders": [[i, list(lad)] for i, lad in value.ladders]}
    if isinstance(value, TermFile):
        return {"kind": "orderterm", "term": format_term(value.term)}
    if isinstance(value, LexTree):
        return {
            "kind": "tree",
            "nodes": [
                {"id": n.id, "level": h, "parent": n.parent, "label": _rat(n.label)}
                for h, level in enumerate(value.levels)
                for n in level
            ],
        }
    if isinstance(value, Branch):
        return {"kind": "branch", "nodes": list(value.nodes)}
    if isinstance(value, IsoFamily):
        return {
            "kind": "family",
            "bound": value.bound,
            "maps": [{"t": t, "s": s, "pairs": _pairs(m)} for (t, s), m in sorted(value.maps.items())],
        }
    if isinstance(value, HCondition):
        return {
            "kind": "hcondition",
            "alpha": value.alpha,
            "tree": to_record(value.tree),
            "branch_map": _pairs(value.branch_map),
            "family": to_record(value.family),
            "club": list(value.club),
        }
    if isinstance(value, FAmbient):
        return {
            "kind": "fambient",
            "tree": to_record(value.tree),
            "branches": [[i, list(b.nodes)] for i, b in sorted(value.branches.items())],
            "family": to_record(value.family),
            "X": sorted(value.X),
            "Y": sorted(value.Y),
        }
    if isinstance(value, FCondition):
        return {"kind": "fcondition", "A": list(value.A), "f": _pairs(value.f), "phi": _pairs(value.phi)}
    if isinstance(value, CaptureSet):
        return {
            "kind": "captureset",
            "cuts": [_rat(c) for c in sorted(value.cuts)],
            "branches": sorted(list(b.nodes) for b in value.branches),
            "nodes": sorted(value.nodes),
        }
    if isinstance(value, TraceWindow):
        return {"kind": "tracewindow", "delta": value.delta, "indices": sorted(value.indices)}
    if isinstance(value, PAmbient):
        return {
            "kind": "pambient",
            "tree": to_record(value.tree),
            "branches": [[i, list(b.nodes)] for i, b in sorted(value.branches.items())],
            "L": sorted(value.L),
            "allow_closure_branches": value.allow_closure_branches,
        }
    if isinstance(value, PCondition):
        return {"kind": "pcondition", "seq": [to_record(z) for z in value.seq]}
    if isinstance(value, Scenario):
        return {
            "kind": "scenario",
            "name": value.name,
            "poset": value.poset,
            "seed": value.seed,
            "club": list(value.club),
            "ambient": _ref_record(value.ambient),
            "initial": _ref_record(value.initial),
            "schedule": [{"op": s.op, **s.args} for s in value.schedule],
            "checks": list(value.checks),
        }
    if isinstance(value, Report):
        return {
            "kind": "report",
            "name": value.name,
            "poset": value.poset,
            "seed": value.seed,
            "steps": list(value.steps),
            "final": value.final,
            "status": value.status,
        }
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _ref_record(v):
    if v is None or isinstance(v, str):
        return v
    return to_record(v)


def _ref_value(v):
    if v is None or isinstance(v, str):
        return v
    return from_record(v)


def _need(rec: dict, key: str):
    try:
        return rec[key]
    except (KeyError, TypeError):
        raise FormatError(f"missing field {key!r} in {rec.get('kind', '?') if isinstance(rec, dict) else rec!r}") from None


def _tree(rec) -> LexTree:
    nodes = _need(rec, "nodes")
    depth = 1 + max((int(_need(n, "level")) for n in nodes), default=-1)
    levels: list[list[Node]] = [[] for _ in range(depth)]
    for n in nodes:
        parent = n.get("parent")
        levels[int(n["level"])].append(
            Node(str(_need(n, "id")), None if parent is None else str(parent), parse_rational(_need(n, "label")))
        )
    return LexTree(tuple(tuple(level) for level in levels))


def _family(rec) -> IsoFamily:
    maps = {}
    for m in _need(rec, "maps"):
        maps[(str(_need(m, "t")), str(_need(m, "s")))] = {str(x): str(y) for x, y in _need(m, "pairs")}
    return IsoFamily(maps, int(_need(rec, "bound")))


def _branches(rec) -> dict[int, Branch]:
    return {int(i): Branch(tuple(str(x) for x in nodes)) for i, nodes in _need(rec, "branches")}


def from_record(rec: dict):
    if not isinstance(rec, dict):
        raise FormatError(f"expected a record, got {type(rec).__name__}")
    kind = rec.get("kind")
    try:
        return _decode(kind, rec)
    except FormatError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise FormatError(f"bad {kind} record: {exc}") from None


def _decode(kind, rec):
    if kind == "linorder":
        return LinOrder(tuple((str(e), parse_rational(p)) for e, p in _need(rec, "elements")))
    if kind == "ladder":
        return LadderOrder(tuple((int(i), tuple(int(x) for x in lad)) for i, lad in _need(rec, "ladders")))
    if kind == "orderterm":
        return TermFile(parse_term(_need(rec, "term")))
    if kind == "tree":
        return _tree(rec)
    if kind == "branch":
        return Branch(tuple(str(x) for x in _need(rec, "nodes")))
    if kind == "family":
        return _family(rec)
    if kind == "hcondition":
        return HCondition(
            int(_need(rec, "alpha")),
            _tree(_need(rec, "tree")),
            {int(i): str(n) for i, n in _need(rec, "branch_map")},
            _family(_need(rec, "family")),
            tuple(int(c) for c in rec.get("club", [])),
        )
    if kind == "fambient":
        return FAmbient(
            _tree(_need(rec, "tree")),
            _branches(rec),
            _family(_need(rec, "family")),
            frozenset(int(i) for i in _need(rec, "X")),
            frozenset(int(i) for i in _need(rec, "Y")),
        )
    if kind == "fcondition":
        return FCondition(
            tuple(int(a) for a in _need(rec, "A")),
            {str(x): str(y) for x, y in _need(rec, "f")},
            {int(x): int(y) for x, y in _need(rec, "phi")},
        )
    if kind == "captureset":
        return CaptureSet(
            frozenset(parse_rational(c) for c in rec.get("cuts", [])),
            frozenset(Branch(tuple(str(x) for x in b)) for b in rec.get("branches", [])),
            frozenset(str(n) for n in rec.get("nodes", [])),
        )
    if kind == "tracewindow":
        return TraceWindow(int(_need(rec, "delta")), frozenset(int(i) for i in rec.get("indices", [])))
    if kind == "pambient":
        return PAmbient(
            _tree(_need(rec, "tree")),
            _branches(rec),
            frozenset(int(i) for i in _need(rec, "L")),
            bool(rec.get("allow_closure_branches", False)),
        )
    if kind == "pcondition":
        return PCondition(tuple(from_record(z) for z in _need(rec, "seq")))
    if kind == "scenario":
        steps = []
        for s in _need(rec, "schedule"):
            args = {k: v for k, v in s.items() if k != "op"}
            steps.append(Step(str(_need(s, "op")), args))
        seed = rec.get("seed")
        return Scenario(
            poset=str(_need(rec, "poset")),
            schedule=tuple(steps),
            checks=tuple(rec.get("checks", ["validate"])),
            seed=None if seed is None else int(seed),
            ambient=_ref_value(rec.get("ambient")),
            initial=_ref_value(rec.get("initial")),
            club=tuple(int(c) for c in rec.get("club", [])),
            name=str(rec.get("name", "")),
        )
    if kind == "report":
        return Report(
            poset=str(_need(rec, "poset")),
            seed=int(_need(rec, "seed")),
            steps=tuple(_need(rec, "steps")),
            final=_need(rec, "final"),
            status=int(_need(rec, "status")),
            name=str(rec.get("name", "")),
        )
    raise FormatError(f"unknown kind {kind!r}")


def dumps(value) -> str:
    rec = {"schema": SCHEMA, **to_record(value)}
    return json.dumps(rec, sort_keys=True, indent=2) + "\n"


def load_record(text: str) -> dict:
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None
    if not isinstance(rec, dict):
        raise FormatError("top level must be an object")
    schema = rec.get("schema")
    if schema != SCHEMA:
        raise FormatError(f"unsupported schema {schema!r} (expected {SCHEMA!r})")
    return rec


def loads(text: str):
    return from_record(load_record(text))


def read(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    return loads(text)


def write(path, value) -> None:
    Path(path).write_text(dumps(value))


__all__ = ["SCHEMA", "Report", "Scenario", "Step", "TermFile", "dumps", "from_record", "loads", "read",
           "to_record", "write"]
