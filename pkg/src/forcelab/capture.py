"""Capturing, Omega/Gamma membership for linear orders and trees, and transport checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from ._common import PreconditionError
from .lextree import Branch, LexTree
from .order import LinOrder


@dataclass(frozen=True)
class CaptureSet:
    """Finite stand-in for a countable Z: cuts of an order, branches and nodes of a tree."""

    cuts: frozenset[Fraction] = frozenset()
    branches: frozenset[Branch] = frozenset()
    nodes: frozenset[str] = frozenset()

    @classmethod
    def of(cls, cuts=(), branches=(), nodes=()) -> "CaptureSet":
        return cls(frozenset(Fraction(c) for c in cuts), frozenset(branches), frozenset(nodes))

    def __le__(self, other: "CaptureSet") -> bool:
        return self.cuts <= other.cuts and self.branches <= other.branches and self.nodes <= other.nodes

    def __or__(self, other: "CaptureSet") -> "CaptureSet":
        return CaptureSet(self.cuts | other.cuts, self.branches | other.branches, self.nodes | other.nodes)


@dataclass(frozen=True)
class TraceWindow:
    delta: int
    indices: frozenset[int] = frozenset()


# -- linear orders --------------------------------------------------------------


def _position(x: str, L: LinOrder) -> Fraction:
    try:
        return L.pos(x)
    except KeyError:
        raise PreconditionError(f"{x!r} is not an element of the order") from None


def capture_witnesses(Z: CaptureSet, x: str, L: LinOrder) -> set[Fraction]:
    px = _position(x, L)
    inside = [p for p in L.positions if p in Z.cuts]
    out = set()
    for z in Z.cuts:
        lo, hi = min(px, z), max(px, z)
        if not any(lo < p < hi for p in inside):
            out.add(z)
    return out


def captures(Z: CaptureSet, x: str, L: LinOrder) -> bool:
    return bool(capture_witnesses(Z, x, L))


def in_omega(Z: CaptureSet, L: LinOrder) -> bool:
    return all(captures(Z, x, L) for x in L.ids)


def gamma_members(L: LinOrder, universe: Iterable[Fraction], k: int) -> list[frozenset[Fraction]]:
    """All k-subsets of `universe` (as cut sets) that fail to capture some element of L."""
    pts = sorted({Fraction(u) for u in universe})
    if k > len(pts):
        raise PreconditionError(f"k={k} exceeds the universe size {len(pts)}")
    return [
        frozenset(combo)
        for combo in combinations(pts, k)
        if not in_omega(CaptureSet(frozenset(combo)), L)
    ]


# -- trees --------------------------------------------------------------------------


def _check_branch(b: Branch, T: LexTree):
    if not T.is_branch(b):
        raise PreconditionError(f"{b} is not a branch of the tree")


def tree_delta(t: str, b: Branch, T: LexTree) -> int:
    """Height of the first node of b that is not <=_T t (predecessor read reflexively)."""
    if t not in T:
        raise PreconditionError(f"{t!r} is not a node of the tree")
    _check_branch(b, T)
    for h, x in enumerate(b.nodes):
        if not T.is_le(x, t):
            return h
    return len(b)


def tree_captures(Z: CaptureSet, t: str, w: TraceWindow, T: LexTree) -> bool:
    if t not in T:
        raise PreconditionError(f"{t!r} is not a node of the tree")
    return t in Z.nodes or any(tree_delta(t, b, T) >= w.delta for b in Z.branches)


def divergence(a: Branch, b: Branch) -> int:
    """First level where a and b differ; 0 for identical branches."""
    for h, (x, y) in enumerate(zip(a.nodes, b.nodes)):
        if x != y:
            return h
    return 0


def alpha_Z(Z: CaptureSet, T: LexTree) -> int:
    if not Z.branches:
        raise PreconditionError("alpha_Z needs at least one branch")
    for b in Z.branches:
        _check_branch(b, T)
    bs = sorted(Z.branches, key=lambda b: b.nodes)
    return max((divergence(a, b) for a, b in combinations(bs, 2)), default=0)


def in_omega_tree(Z: CaptureSet, T: LexTree) -> bool:
    level = alpha_Z(Z, T)
    covered = {b[level] for b in Z.branches}
    return all(t in covered for t in T.level_ids(level))


def transports(
    f: Mapping,
    A: Iterable[Iterable],
    B: Iterable[Iterable],
    candidates: Iterable[Iterable] | None = None,
) -> bool:
    """Check M in A <=> f[M] in B for every listed M.

    The default candidate list is A together with the f-preimages of the
    members of B.
    """
    fam_a = {frozenset(m) for m in A}
    fam_b = {frozenset(m) for m in B}
    if candidates is None:
        inverse = {v: k for k, v in f.items()}
        listed = set(fam_a)
        for m in fam_b:
            if all(y in inverse for y in m):
                listed.add(frozenset(inverse[y] for y in m))
    else:
        listed = {frozenset(m) for m in candidates}
    for m in listed:
        missing = [x for x in m if x not in f]
        if missing:
            raise PreconditionError(f"f is undefined on {sorted(map(str, missing))}")
        if (m in fam_a) != (frozenset(f[x] for x in m) in fam_b):
            return False
    return True
