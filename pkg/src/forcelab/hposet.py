"""The homogeneous Kurepa-tree poset: conditions (tree, indexed branches, isomorphism family).

A condition q carries a tree of height alpha (levels 0..alpha), an injection
from indices into the top level, the full family of cone isomorphisms between
same-height nodes below alpha, and an explicit club parameter.

Finite sibling sets make cone isomorphisms rigid, so a complete family is
determined by the tree; tactics rebuild it with `canonical_family` rather
than extending maps piecemeal.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence, Union

from ._common import (
    ConstructionError,
    Policy,
    PreconditionError,
    UnionFind,
    Violation,
    rng_for,
)
from .lextree import (
    Branch,
    IsoFamily,
    LexTree,
    Node,
    canonical_family,
    top_relation_classes,
    validate_family,
    validate_tree,
)

_STRUCTURAL = {"empty-level", "duplicate-id", "unknown-parent", "bad-parent-level"}


@dataclass(frozen=True)
class HCondition:
    alpha: int
    tree: LexTree
    branch_map: Mapping[int, str]
    family: IsoFamily
    club: tuple[int, ...] = ()

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(self.branch_map)


@dataclass(frozen=True)
class HeightAbove:
    alpha: int


@dataclass(frozen=True)
class IndexIn:
    index: int


DenseGoal = Union[HeightAbove, IndexIn]


def trivial_condition(club: Sequence[int] = (), root: str = "r") -> HCondition:
    tree = LexTree((( Node(root, None, Fraction(0)),),))
    return HCondition(0, tree, {}, canonical_family(tree, 0), tuple(sorted(club)))


def meets(q: HCondition, goal: DenseGoal) -> bool:
    if isinstance(goal, HeightAbove):
        return q.alpha > goal.alpha
    if isinstance(goal, IndexIn):
        return goal.index in q.branch_map
    raise TypeError(f"unknown goal {goal!r}")


def signature(index: int, club: Sequence[int]) -> tuple[bool, ...]:
    """Which side of each club point the index falls on."""
    return tuple(index < a for a in club)


# -- validation ------------------------------------------------------------------


def validate_condition(q: HCondition) -> list[Violation]:
    T = q.tree
    out = list(validate_tree(T))
    if any(v.kind in _STRUCTURAL for v in out):
        return out
    if T.height != q.alpha:
        out.append(Violation("c1", "height-mismatch", (q.alpha,), f"tree height {T.height} != alpha {q.alpha}"))
        return out
    for h in range(q.alpha):
        for x in T.level_ids(h):
            if not T.children(x):
                out.append(Violation("c1", "leaf-below-top", (x,), f"{x} has no successors"))

    inverse: dict[str, int] = {}
    injective = True
    for xi, node in sorted(q.branch_map.items()):
        if node not in T or T.level_of(node) != q.alpha:
            out.append(Violation("c2", "not-top-level", (xi, node), f"b({xi}) is not on the top level"))
            injective = False
        elif node in inverse:
            out.append(Violation("c2", "not-injective", (inverse[node], xi, node), f"{node} indexed twice"))
            injective = False
        else:
            inverse[node] = xi

    if q.family.bound != q.alpha:
        out.append(Violation("c3", "bad-bound", (q.family.bound,), "family bound must equal alpha"))
    out.extend(validate_family(T, q.family, complete=True))

    if injective and q.club:
        seen = set()
        for (t, s), m in sorted(q.family.maps.items()):
            for xi, node in q.branch_map.items():
                y = m.get(node)
                if y is None or y not in inverse:
                    continue
                eta = inverse[y]
                for a in q.club:
                    if (xi < a) != (eta < a) and (xi, eta, a) not in seen:
                        seen.add((xi, eta, a))
                        out.append(Violation("c6", "club-split", (xi, eta, a, t, s),
                                             f"pi[{t},{s}] links {xi} and {eta} across {a}"))
    return out


def condition_diagnostics(q: HCondition) -> dict:
    """Counts that are not violations: vacuous c6 instances and sizes."""
    ran = set(q.branch_map.values())
    vacuous = 0
    for m in q.family.maps.values():
        for node in q.branch_map.values():
            y = m.get(node)
            if y is not None and y not in ran:
                vacuous += 1
    return {
        "alpha": q.alpha,
        "dom_size": len(q.branch_map),
        "pairs": len(q.family.maps),
        "c6_vacuous": vacuous,
        "level_sizes": [len(level) for level in q.tree.levels],
    }


def extends(q: HCondition, p: HCondition, validate: bool = True) -> list[Violation]:
    """Violations of q <= p. With `validate`, invalid inputs raise instead."""
    if validate:
        for name, c in (("q", q), ("p", p)):
            bad = validate_condition(c)
            if bad:
                raise PreconditionError(f"{name} is not a valid condition: {bad[0]}")
    out = []
    if tuple(q.club) != tuple(p.club):
        out.append(Violation("club", "club-mismatch", (), "extension requires identical clubs"))

    Tq, Tp = q.tree, p.tree
    if Tq.height < p.alpha:
        out.append(Violation("e1", "too-short", (Tq.height, p.alpha), "q is lower than p"))
        return out
    for h in range(p.alpha + 1):
        a, b = set(Tq.levels[h]), set(Tp.levels[h])
        if a != b:
            diff = sorted({n.id for n in a ^ b})
            out.append(Violation("e1", "tree-prefix-mismatch", tuple(diff), f"level {h} differs"))

    missing = sorted(p.dom - q.dom)
    if missing:
        out.append(Violation("e2", "domain-shrunk", tuple(missing), "indices dropped"))

    shared = sorted(p.dom & q.dom)
    for xi in shared:
        u, v = p.branch_map[xi], q.branch_map[xi]
        if not (u in Tq and v in Tq and Tq.is_le(u, v)):
            out.append(Violation("e3", "not-above", (xi, u, v), f"b_q({xi}) is not above b_p({xi})"))

    p_nodes = set(Tp.node_ids)
    for (t, s), m in sorted(p.family.maps.items()):
        mq = q.family.get(t, s)
        if mq is None or any(mq.get(x) != y for x, y in m.items() if x in p_nodes):
            out.append(Violation("e4", "family-not-extended", (t, s), f"pi_q[{t},{s}] does not restrict to pi_p"))

    inverse_p = {node: xi for xi, node in p.branch_map.items()}
    shared_set = set(shared)
    for (t, s), m in sorted(p.family.maps.items()):
        mq = q.family.get(t, s) or {}
        for xi in shared:
            y = m.get(p.branch_map[xi])
            eta = inverse_p.get(y)
            if eta is None or eta not in shared_set:
                continue
            if mq.get(q.branch_map[xi]) != q.branch_map[eta]:
                out.append(Violation("e5", "link-broken", (t, s, xi, eta),
                                     f"pi[{t},{s}] linked {xi} to {eta} in p but not in q"))
    return out


# -- tactics ------------------------------------------------------------------------


def _fresh_id(base: str, taken: set[str]) -> str:
    cand = base
    while cand in taken:
        cand += "'"
    taken.add(cand)
    return cand


def _add_level(tree: LexTree, labels: Mapping[str, Sequence[Fraction]]) -> tuple[LexTree, dict]:
    """Append one level; labels[u] lists the (sorted) child labels of top node u."""
    taken = set(tree.node_ids)
    new_level = []
    child = {}
    for u in tree.level_ids(tree.height):
        for r, lab in enumerate(sorted(labels[u])):
            cid = _fresh_id(f"{u}.{r}", taken)
            child[(u, r)] = cid
            new_level.append(Node(cid, u, Fraction(lab)))
    return LexTree(tree.levels + (tuple(new_level),)), child


def _random_labels(tree: LexTree, fanout: int, rng) -> dict[str, list[Fraction]]:
    out = {}
    for u in tree.level_ids(tree.height):
        den = rng.randint(1, 4)
        nums = rng.sample(range(-3 * fanout, 3 * fanout + 1), fanout)
        out[u] = sorted(Fraction(n, den) for n in nums)
    return out


def _index_groups(p: HCondition) -> list[list[int]]:
    """Indices whose top nodes are linked by the family; e5 forces equal extension ranks."""
    cls = top_relation_classes(p.tree, p.family, p.branch_map.values())
    groups: dict[int, list[int]] = defaultdict(list)
    for xi, node in sorted(p.branch_map.items()):
        groups[cls[node]].append(xi)
    return sorted(groups.values())


def _group_signature(group, club):
    sigs = {signature(xi, club) for xi in group}
    if len(sigs) > 1:
        raise ConstructionError("c6-conflict", f"linked indices {group} straddle a club point")
    return sigs.pop()


def _one_step(p: HCondition, policy: Policy, new_index: int | None = None) -> HCondition:
    rng = rng_for(policy.seed, "step", p.alpha)
    fanout = policy.fanout
    groups = _index_groups(p)
    group_sig = [_group_signature(g, p.club) for g in groups]
    sigs = sorted(set(group_sig) | ({signature(new_index, p.club)} if new_index is not None else set()))
    if len(sigs) > fanout:
        raise ConstructionError(
            "c6-linking-impossible", f"{len(sigs)} club signatures need distinct ranks but fanout is {fanout}"
        )
    # same rank => same signature; each signature owns at least one rank
    ranks = list(range(fanout))
    rng.shuffle(ranks)
    owned: dict[tuple, list[int]] = {sig: [ranks[i]] for i, sig in enumerate(sigs)}
    for r in ranks[len(sigs):]:
        if sigs:
            owned[rng.choice(sigs)].append(r)
    rank_of: dict[int, int] = {}
    for g, sig in zip(groups, group_sig):
        r = rng.choice(sorted(owned[sig]))
        for xi in g:
            rank_of[xi] = r

    tree, child = _add_level(p.tree, _random_labels(p.tree, fanout, rng))
    bmap = {xi: child[(p.branch_map[xi], rank_of[xi])] for xi in p.branch_map}
    if new_index is not None:
        used = set(bmap.values())
        options = [
            child[(u, r)]
            for r in sorted(owned[signature(new_index, p.club)])
            for u in p.tree.level_ids(p.alpha)
            if child[(u, r)] not in used
        ]
        if not options:
            raise ConstructionError("no-c6-routing", f"no free top node for index {new_index}")
        bmap[new_index] = rng.choice(options)
    return HCondition(p.alpha + 1, tree, bmap, canonical_family(tree, p.alpha + 1), p.club)


def extend_height(p: HCondition, target: int, policy: Policy = Policy()) -> HCondition:
    if target <= p.alpha:
        raise PreconditionError(f"target {target} must exceed alpha {p.alpha}")
    q = p
    while q.alpha < target:
        q = _one_step(q, policy.child("extend", q.alpha))
    return q


def add_branch_index(p: HCondition, index: int, policy: Policy = Policy()) -> HCondition:
    if index in p.branch_map:
        raise PreconditionError(f"index {index} is already in the domain")
    return _one_step(p, policy.child("index", index, p.alpha), new_index=index)


def _check_chain(chain: Sequence[HCondition]):
    if not chain:
        raise PreconditionError("chain must be nonempty")
    for a, b in zip(chain, chain[1:]):
        if b.alpha <= a.alpha:
            raise PreconditionError("chain alphas must strictly increase")
        bad = extends(b, a, validate=False)
        if bad:
            raise PreconditionError(f"chain is not descending: {bad[0]}")


def limit_lower_bound(chain: Sequence[HCondition]) -> HCondition:
    """Lower bound of a descending chain, with one fresh top level.

    Each old top node receives one successor per club signature occurring
    among the indices; every index routes to the successor of its signature.
    All new nodes are Pi-images of indexed bounds, and linked indices stay
    linked because they share a signature.
    """
    _check_chain(chain)
    last = chain[-1]
    sigs = sorted({signature(xi, last.club) for xi in last.branch_map}) or [()]
    for g in _index_groups(last):
        _group_signature(g, last.club)
    rank = {sig: i for i, sig in enumerate(sigs)}
    labels = {u: [Fraction(i) for i in range(len(sigs))] for u in last.tree.level_ids(last.alpha)}
    tree, child = _add_level(last.tree, labels)
    bmap = {
        xi: child[(node, rank[signature(xi, last.club)])] for xi, node in last.branch_map.items()
    }
    q = HCondition(last.alpha + 1, tree, bmap, canonical_family(tree, last.alpha + 1), last.club)
    return q


# -- chain condition ------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaSystem:
    root: frozenset
    positions: tuple[int, ...]
    exhaustive: bool


EXHAUSTIVE_LIMIT = 12


def _root_of(sets, positions):
    if len(positions) == 1:
        return sets[positions[0]]
    root = None
    for i, j in combinations(positions, 2):
        inter = sets[i] & sets[j]
        if root is None:
            root = inter
        elif inter != root:
            return None
    return root


def delta_system(domains: Sequence) -> DeltaSystem:
    """Largest Delta-subsystem; ties go to the lexicographically first positions.

    Exhaustive up to EXHAUSTIVE_LIMIT sets, a greedy sunflower search above.
    """
    sets = [frozenset(d) for d in domains]
    n = len(sets)
    if n == 0:
        raise PreconditionError("delta_system needs a nonempty list")
    if n <= EXHAUSTIVE_LIMIT:
        for size in range(n, 0, -1):
            for combo in combinations(range(n), size):
                root = _root_of(sets, combo)
                if root is not None:
                    return DeltaSystem(root, combo, True)
    best = (0, (), frozenset())
    roots = {sets[i] & sets[j] for i, j in combinations(range(n), 2)}
    for root in sorted(roots, key=lambda r: sorted(r)):
        picked, used = [], set()
        for i, d in enumerate(sets):
            if root <= d and not ((d - root) & used):
                picked.append(i)
                used |= d - root
        if len(picked) > best[0] or (len(picked) == best[0] and tuple(picked) < best[1]):
            best = (len(picked), tuple(picked), root)
    return DeltaSystem(best[2], best[1], False)


def amalgamate(p: HCondition, q: HCondition) -> HCondition:
    """Common lower bound of two conditions sharing tree, family and club.

    Indices linked within p or within q (or shared) form groups that must
    extend through equal sibling ranks; each group gets its own rank, in
    order of its least index, so the result does not depend on argument order.
    """
    if p.tree != q.tree or p.alpha != q.alpha:
        raise PreconditionError("tree-mismatch: conditions must share the tree")
    if p.family != q.family:
        raise PreconditionError("family-mismatch: conditions must share the family")
    if tuple(p.club) != tuple(q.club):
        raise PreconditionError("club-mismatch: conditions must share the club")
    for xi in sorted(p.dom & q.dom):
        if p.branch_map[xi] != q.branch_map[xi]:
            raise PreconditionError(f"branch-disagreement: index {xi} routed differently")

    uf = UnionFind()
    for c in (p, q):
        for g in _index_groups(c):
            for xi in g:
                uf.union(g[0], xi)
    merged = sorted(sorted(g) for g in uf.groups())
    node_of = {**p.branch_map, **q.branch_map}
    rank_of = {}
    for r, g in enumerate(merged):
        _group_signature(g, p.club)
        nodes = [node_of[xi] for xi in g]
        if len(set(nodes)) != len(nodes):
            raise PreconditionError(f"branch-collision: linked indices {g} share a top node")
        for xi in g:
            rank_of[xi] = r
    width = max(1, len(merged))
    labels = {u: [Fraction(i) for i in range(width)] for u in p.tree.level_ids(p.alpha)}
    tree, child = _add_level(p.tree, labels)
    bmap = {xi: child[(node_of[xi], rank_of[xi])] for xi in sorted(node_of)}
    return HCondition(p.alpha + 1, tree, bmap, canonical_family(tree, p.alpha + 1), p.club)


# -- generic assembly ---------------------------------------------------------------------


@dataclass(frozen=True)
class GenericAssembly:
    tree: LexTree
    branches: Mapping[int, Branch]
    family: IsoFamily
    first_seen: Mapping[int, int] = field(default_factory=dict)


def assemble_generic(run: Sequence[HCondition]) -> GenericAssembly:
    """Union of a descending run: the last tree, each index's branch, the last family."""
    if not run:
        raise PreconditionError("run must be nonempty")
    for a, b in zip(run, run[1:]):
        if b.alpha < a.alpha:
            raise PreconditionError("run is not a chain")
        if b is not a and b != a:
            bad = extends(b, a, validate=False)
            if bad:
                raise PreconditionError(f"run is not a chain: {bad[0]}")
    last = run[-1]
    first_seen = {}
    for c in run:
        for xi in c.branch_map:
            first_seen.setdefault(xi, c.alpha)
    branches = {xi: last.tree.branch_to(node) for xi, node in sorted(last.branch_map.items())}
    return GenericAssembly(last.tree, branches, last.family, first_seen)
