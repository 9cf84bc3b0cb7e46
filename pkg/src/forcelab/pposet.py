"""Club shooting through a suborder L of the branch space.

A condition is a nonempty, increasing sequence of capture sets, each made of
branches of L that capture the tree generated by L. Continuity has no finite
content and is not checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ._common import ConstructionError, PreconditionError, Violation
from .capture import CaptureSet, in_omega_tree
from .lextree import Branch, LexTree


@dataclass(frozen=True)
class PAmbient:
    tree: LexTree
    branches: Mapping[int, Branch]
    L: frozenset[int]
    allow_closure_branches: bool = False

    def subtree(self) -> LexTree:
        """The tree generated by the branches of L (its nodes, with inherited labels)."""
        keep = {x for i in self.L for x in self.branches[i].nodes}
        return LexTree(tuple(tuple(n for n in level if n.id in keep) for level in self.tree.levels))

    def admissible_branches(self) -> frozenset[Branch]:
        if self.allow_closure_branches:
            return frozenset(self.subtree().branches())
        return frozenset(self.branches[i] for i in self.L)


@dataclass(frozen=True)
class PCondition:
    seq: tuple[CaptureSet, ...]

    @property
    def alpha(self) -> int:
        return len(self.seq) - 1


def omega_admissible(amb: PAmbient, Z: CaptureSet) -> list[Violation]:
    if not Z.branches:
        return [Violation("not-capturing", "empty", (), "no branches")]
    foreign = Z.branches - amb.admissible_branches()
    if foreign:
        return [Violation("not-capturing", "foreign-branch", tuple(b.nodes[-1] for b in foreign),
                          "branch outside L")]
    if not in_omega_tree(Z, amb.subtree()):
        return [Violation("not-capturing", "uncovered-level", (), "a node at level alpha_Z is uncovered")]
    return []


def validate_pcondition(amb: PAmbient, p: PCondition) -> list[Violation]:
    if not p.seq:
        return [Violation("not-increasing", "empty-sequence", (), "sequence must be nonempty")]
    out = []
    for i, (a, b) in enumerate(zip(p.seq, p.seq[1:])):
        if not a <= b:
            out.append(Violation("not-increasing", "shrinks", (i, i + 1), f"Z_{i} is not contained in Z_{i + 1}"))
    for i, Z in enumerate(p.seq):
        for v in omega_admissible(amb, Z):
            out.append(Violation(v.clause, v.kind, (i,) + v.witnesses, f"Z_{i}: {v.message}"))
    return out


def p_extends(q: PCondition, p: PCondition) -> list[Violation]:
    if q.seq[: len(p.seq)] != p.seq:
        return [Violation("p-ext", "not-initial-segment", (), "p is not an initial segment of q")]
    return []


def p_lower_bound(amb: PAmbient, chain: Sequence[PCondition]) -> PCondition:
    """Append the union of the top entries to the longest member.

    The union is checked before the chain shape, so a non-capturing union is
    reported as such even when the inputs are not nested.
    """
    if not chain:
        raise PreconditionError("chain must be nonempty")
    top = CaptureSet()
    for c in chain:
        if not c.seq:
            raise PreconditionError("empty condition in chain")
        top = top | c.seq[-1]
    bad = omega_admissible(amb, top)
    if bad:
        raise ConstructionError("limit-not-capturing", bad[0].message, bad)
    longest = max(chain, key=lambda c: len(c.seq))
    for c in chain:
        if p_extends(longest, c):
            raise PreconditionError("non-chain input: members are not initial segments of one another")
    return PCondition(longest.seq + (top,))

