"""The embedding poset over an ambient tree with indexed branches.

A condition is (A, f, phi): a finite set of heights A with max alpha, a
level-, parent- and lex-preserving bijection f of the tree restricted to A,
and a partial injection phi on branch indices. Each level of a finite tree is
a finite chain under the lex order, so a valid f is always the identity on
T|A; the interesting content lives in phi.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ._common import ConstructionError, PreconditionError, Violation
from .lextree import Branch, IsoFamily, LexTree, lex_compare_branches, validate_family


@dataclass(frozen=True)
class FAmbient:
    tree: LexTree
    branches: Mapping[int, Branch]
    family: IsoFamily
    X: frozenset[int]
    Y: frozenset[int]

    def b(self, xi: int, h: int) -> str:
        return self.branches[xi][h]


@dataclass(frozen=True)
class FCondition:
    A: tuple[int, ...]
    f: Mapping[str, str]
    phi: Mapping[int, int]

    @property
    def alpha(self) -> int:
        return max(self.A)


def validate_ambient(amb: FAmbient) -> list[str]:
    out = []
    for name, s in (("X", amb.X), ("Y", amb.Y)):
        extra = sorted(set(s) - set(amb.branches))
        if extra:
            out.append(f"{name} contains unindexed {extra}")
    for xi, b in sorted(amb.branches.items()):
        if not amb.tree.is_branch(b):
            out.append(f"branch {xi} is not a full branch of the tree")
    out.extend(f"{v.clause}:{v.kind}" for v in validate_family(amb.tree, amb.family, complete=True))
    return out


def identity_condition(amb: FAmbient, heights: Iterable[int]) -> FCondition:
    A = tuple(sorted(set(heights)))
    return FCondition(A, {x: x for h in A for x in amb.tree.level_ids(h)}, {})


def _a_parent(T: LexTree, x: str, A: Sequence[int]) -> str | None:
    h = T.level_of(x)
    below = [a for a in A if a < h]
    return T.ancestor_at(x, below[-1]) if below else None


def fiber_sizes(amb: FAmbient, p: FCondition) -> Counter:
    return Counter(amb.b(xi, p.alpha) for xi in p.phi if xi in amb.branches)


def max_fiber_size(amb: FAmbient, p: FCondition) -> int:
    return max(fiber_sizes(amb, p).values(), default=0)


def validate_fcondition(amb: FAmbient, p: FCondition, max_fiber: int | None = None) -> list[Violation]:
    T = amb.tree
    out: list[Violation] = []
    A = tuple(sorted(set(p.A)))
    if not A or A[0] < 0 or A[-1] > T.height:
        return [Violation("f1", "bad-heights", tuple(p.A), "A must be a nonempty set of tree heights")]
    alpha = A[-1]

    # f1
    dom = [x for h in A for x in T.level_ids(h)]
    if set(p.f) != set(dom):
        out.append(Violation("f1", "domain-mismatch", (), "f is not defined exactly on T|A"))
    else:
        images = [p.f[x] for x in dom]
        if len(set(images)) != len(images) or set(images) != set(dom):
            out.append(Violation("f1", "not-bijective", (), "f is not a bijection of T|A"))
        for x in dom:
            y = p.f[x]
            if y not in T or T.level_of(y) != T.level_of(x):
                out.append(Violation("f1", "level-violation", (x, y), f"{x} -> {y} changes level"))
                continue
            px = _a_parent(T, x, A)
            if px is not None and p.f.get(px) != _a_parent(T, y, A):
                out.append(Violation("f1", "parent-violation", (x, y), f"{x} -> {y} breaks the A-parent"))
        for h in A:
            ids = sorted(T.level_ids(h), key=T.lex_key)
            imgs = [p.f[x] for x in ids]
            if all(y in T for y in imgs):
                for (a, b), (fa, fb) in zip(zip(ids, ids[1:]), zip(imgs, imgs[1:])):
                    if T.level_of(fa) == T.level_of(fb) == h and T.compare_nodes(fa, fb) >= 0:
                        out.append(Violation("f1", "lex-violation", (a, b), f"f reverses {a} < {b}"))

    # phi shape
    known = [xi for xi in p.phi if xi in amb.branches and p.phi[xi] in amb.branches]
    for xi in p.phi:
        if xi not in known:
            out.append(Violation("f2", "unknown-index", (xi, p.phi[xi]), "phi uses an unindexed branch"))
    values = Counter(p.phi.values())
    for xi, eta in sorted(p.phi.items()):
        if values[eta] > 1:
            out.append(Violation("f2", "not-injective", (xi, eta), f"{eta} hit twice"))

    for xi in sorted(known):
        eta = p.phi[xi]
        # f2a
        if (xi in amb.X) != (eta in amb.Y):
            out.append(Violation("f2a", "xy-mismatch", (xi, eta), f"{xi} in X must match {eta} in Y"))
        # f2b
        if xi not in amb.X and alpha < T.height:
            t, s = amb.b(xi, alpha + 1), amb.b(eta, alpha + 1)
            m = amb.family.get(t, s)
            if m is None:
                out.append(Violation("f2b", "no-map", (xi, eta, t, s), f"pi[{t},{s}] missing"))
            elif any(m.get(amb.b(xi, h)) != amb.b(eta, h) for h in range(alpha + 1, T.height + 1)):
                out.append(Violation("f2b", "tail-mismatch", (xi, eta), f"b_{eta} is not pi[{t},{s}][b_{xi}]"))
        # f4
        x = amb.b(xi, alpha)
        if p.f.get(x) != amb.b(eta, alpha):
            out.append(Violation("f4", "top-mismatch", (xi, eta, x), f"f(b_{xi}(alpha)) != b_{eta}(alpha)"))

    # f2c
    ks = sorted(known)
    for i, xi in enumerate(ks):
        for eta in ks[i + 1:]:
            before = lex_compare_branches(amb.branches[xi], amb.branches[eta], T)
            after = lex_compare_branches(amb.branches[p.phi[xi]], amb.branches[p.phi[eta]], T)
            if before != after:
                out.append(Violation("f2c", "lex-violation", (xi, eta), "phi does not preserve branch order"))

    # f3: finite at desk scale; enforced only against an explicit bound
    if max_fiber is not None:
        for node, size in sorted(fiber_sizes(amb, p).items()):
            if size > max_fiber:
                out.append(Violation("f3", "fiber-too-large", (node, size), f"{size} indices pass {node}"))
    return out


def f_extends(q: FCondition, p: FCondition) -> list[Violation]:
    out = []
    for x, y in sorted(p.f.items()):
        if q.f.get(x) != y:
            out.append(Violation("f-ext", "f-not-superset", (x,), f"f_q({x}) != f_p({x})"))
    for xi, eta in sorted(p.phi.items()):
        if q.phi.get(xi) != eta:
            out.append(Violation("f-ext", "phi-not-superset", (xi,), f"phi_q({xi}) != phi_p({xi})"))
    return out


# -- tactics ----------------------------------------------------------------------


def _checked(amb: FAmbient, q: FCondition, code: str) -> FCondition:
    bad = validate_fcondition(amb, q)
    if bad:
        raise ConstructionError(code, str(bad[0]), bad)
    return q


def f_add_pair(amb: FAmbient, p: FCondition, xi: int, eta: int) -> FCondition:
    if xi in p.phi:
        raise PreconditionError(f"{xi} already in dom(phi)")
    return _checked(amb, FCondition(p.A, dict(p.f), {**p.phi, xi: eta}), "invalid-pair")


def f_raise(amb: FAmbient, p: FCondition, height: int) -> FCondition:
    """Add a height above alpha; f on the new level is forced to be the identity."""
    if height <= p.alpha or height > amb.tree.height:
        raise PreconditionError(f"height {height} must lie in ({p.alpha}, {amb.tree.height}]")
    f = dict(p.f)
    f.update({x: x for x in amb.tree.level_ids(height)})
    return _checked(amb, FCondition(p.A + (height,), f, dict(p.phi)), "invalid-raise")


def _check_chain(chain: Sequence[FCondition], delta: int, amb: FAmbient):
    if not chain:
        raise PreconditionError("chain must be nonempty")
    for a, b in zip(chain, chain[1:]):
        bad = f_extends(b, a)
        if bad:
            raise PreconditionError(f"chain is not descending: {bad[0]}")
    if delta > amb.tree.height or any(delta <= c.alpha for c in chain):
        raise PreconditionError(f"delta {delta} must be a tree level above every alpha in the chain")


def _union_phi(phis: Iterable[Mapping[int, int]]) -> dict[int, int]:
    out: dict[int, int] = {}
    for phi in phis:
        for xi, eta in phi.items():
            if out.get(xi, eta) != eta:
                raise ConstructionError("phi-not-function", f"{xi} mapped to {out[xi]} and {eta}")
            out[xi] = eta
    if len(set(out.values())) != len(out):
        raise ConstructionError("phi-not-injective", "the union of the phis is not injective")
    return out


def _close_at(amb: FAmbient, conditions: Sequence[FCondition], phi: dict[int, int], delta: int) -> FCondition:
    level = amb.tree.level_ids(delta)
    covered = {amb.b(xi, delta) for xi in phi}
    if covered != set(level):
        missing = sorted(set(level) - covered)
        raise ConstructionError("not-in-S", f"level {delta} nodes off every indexed branch: {missing}")
    top: dict[str, str] = {}
    for xi, eta in phi.items():
        x, y = amb.b(xi, delta), amb.b(eta, delta)
        if top.get(x, y) != y:
            raise ConstructionError("level-map-not-function", f"{x} sent to {top[x]} and {y}")
        top[x] = y
    f: dict[str, str] = {}
    A: set[int] = {delta}
    for c in conditions:
        f.update(c.f)
        A.update(c.A)
    f.update(top)
    return FCondition(tuple(sorted(A)), f, phi)


def f_limit_lower_bound(amb: FAmbient, chain: Sequence[FCondition], delta: int) -> FCondition:
    _check_chain(chain, delta, amb)
    q = _close_at(amb, chain, _union_phi(c.phi for c in chain), delta)
    return _checked(amb, q, "limit-invalid")


def mirror(p: FCondition, h: Mapping[int, int]) -> FCondition:
    """The h-image of a condition: f is fixed, phi is conjugated by h."""
    hh = lambda x: h.get(x, x)  # noqa: E731
    return FCondition(p.A, dict(p.f), {hh(xi): hh(eta) for xi, eta in p.phi.items()})


def f_mirror_amalgamate(
    amb: FAmbient, chain: Sequence[FCondition], h: Mapping[int, int], delta: int
) -> FCondition:
    """Common lower bound of a chain and its mirror image under the index bijection h."""
    _check_chain(chain, delta, amb)
    hh = lambda x: h.get(x, x)  # noqa: E731
    support = sorted(h)
    if len({hh(x) for x in support}) != len(support):
        raise PreconditionError("h is not injective")
    used = set()
    for c in chain:
        used.update(c.phi)
        used.update(c.phi.values())
    image = {hh(x) for x in used}
    for x in sorted(used & image):
        if hh(x) != x:
            raise PreconditionError(f"h must fix the overlap; moves {x}")
    for x in sorted(used):
        y = hh(x)
        if y not in amb.branches:
            raise PreconditionError(f"h({x}) = {y} is not an indexed branch")
        if (x in amb.X) != (y in amb.X) or (x in amb.Y) != (y in amb.Y):
            raise PreconditionError(f"h breaks X/Y membership at {x}")
        if amb.branches[x].nodes[: delta + 1] != amb.branches[y].nodes[: delta + 1]:
            raise PreconditionError(f"agreement fails: b_{x} and b_{y} differ below {delta}")
    mirrored = [mirror(c, h) for c in chain]
    phi = _union_phi([c.phi for c in chain] + [c.phi for c in mirrored])
    q = _close_at(amb, list(chain) + mirrored, phi, delta)
    return _checked(amb, q, "mirror-invalid")
