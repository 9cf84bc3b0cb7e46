"""Leveled trees with rational sibling labels and cone-isomorphism families.

Sibling labels induce the lexicographic order: two nodes of the same level
compare by the labels at the first level where their root paths diverge.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from ._common import PreconditionError, Violation

LESS, EQUAL, GREATER = -1, 0, 1


@dataclass(frozen=True)
class Node:
    id: str
    parent: str | None
    label: Fraction


@dataclass(frozen=True)
class Branch:
    """One node id per level, from the root level to the top."""

    nodes: tuple[str, ...]

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, level):
        return self.nodes[level]


@dataclass(frozen=True)
class LexTree:
    levels: tuple[tuple[Node, ...], ...]

    @classmethod
    def build(cls, levels: Iterable[Iterable[tuple]]) -> "LexTree":
        """Build from nested ``(id, parent, label)`` triples, one list per level."""
        return cls(
            tuple(
                tuple(Node(str(i), None if p is None else str(p), Fraction(lab)) for i, p, lab in level)
                for level in levels
            )
        )

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    @cached_property
    def _index(self) -> dict[str, tuple[int, Node]]:
        return {n.id: (h, n) for h, level in enumerate(self.levels) for n in level}

    @cached_property
    def _children(self) -> dict[str, list[str]]:
        out: dict[str, list[Node]] = defaultdict(list)
        for level in self.levels[1:]:
            for n in level:
                out[n.parent].append(n)
        return {p: [n.id for n in sorted(ns, key=lambda n: n.label)] for p, ns in out.items()}

    def __contains__(self, node_id) -> bool:
        return node_id in self._index

    def node(self, node_id: str) -> Node:
        return self._index[node_id][1]

    def level_of(self, node_id: str) -> int:
        return self._index[node_id][0]

    def label(self, node_id: str) -> Fraction:
        return self._index[node_id][1].label

    def parent(self, node_id: str) -> str | None:
        return self._index[node_id][1].parent

    def children(self, node_id: str) -> list[str]:
        """Immediate successors, in label order."""
        return self._children.get(node_id, [])

    def level_ids(self, h: int) -> list[str]:
        return [n.id for n in self.levels[h]]

    @property
    def node_ids(self) -> list[str]:
        return [n.id for level in self.levels for n in level]

    def path(self, node_id: str) -> list[str]:
        """Root path, root first, ending at node_id."""
        out = [node_id]
        while (p := self.parent(out[-1])) is not None:
            out.append(p)
        return out[::-1]

    def ancestor_at(self, node_id: str, h: int) -> str:
        return self.path(node_id)[h]

    def is_le(self, x: str, y: str) -> bool:
        """x <=_T y: x is y or an ancestor of y."""
        hx, hy = self.level_of(x), self.level_of(y)
        return hx <= hy and self.ancestor_at(y, hx) == x

    def cone(self, t: str) -> list[str]:
        """t and all its descendants, level by level."""
        out, frontier = [], [t]
        while frontier:
            out.extend(frontier)
            frontier = [c for x in frontier for c in self.children(x)]
        return out

    def compare_nodes(self, x: str, y: str) -> int:
        """Lexicographic comparison of two nodes of the same level."""
        for a, b in zip(self.path(x), self.path(y)):
            if a != b:
                la, lb = self.label(a), self.label(b)
                return LESS if la < lb else GREATER if la > lb else EQUAL
        return EQUAL

    def lex_key(self, node_id: str) -> tuple[Fraction, ...]:
        return tuple(self.label(x) for x in self.path(node_id))

    def branches(self) -> list[Branch]:
        return [Branch(tuple(self.path(t))) for t in self.level_ids(self.height)]

    def branch_to(self, node_id: str) -> Branch:
        return Branch(tuple(self.path(node_id)))

    def is_branch(self, b: Branch) -> bool:
        if len(b) != len(self.levels) or any(x not in self for x in b.nodes):
            return False
        return all(self.level_of(x) == h for h, x in enumerate(b.nodes)) and all(
            self.parent(b[h]) == b[h - 1] for h in range(1, len(b))
        )


def validate_tree(T: LexTree) -> list[Violation]:
    out = []
    seen: dict[str, int] = {}
    for h, level in enumerate(T.levels):
        if not level:
            out.append(Violation("c1", "empty-level", (h,), f"level {h} is empty"))
        for n in level:
            if n.id in seen:
                out.append(Violation("c1", "duplicate-id", (n.id,), "node id used twice"))
            seen.setdefault(n.id, h)
    for h, level in enumerate(T.levels):
        for n in level:
            if h == 0:
                if n.parent is not None:
                    out.append(Violation("c1", "bad-parent-level", (n.id,), "root with a parent"))
            elif n.parent not in seen:
                out.append(Violation("c1", "unknown-parent", (n.id, n.parent), "parent not in tree"))
            elif seen[n.parent] != h - 1:
                out.append(
                    Violation("c1", "bad-parent-level", (n.id, n.parent),
                              f"parent at level {seen[n.parent]}, expected {h - 1}")
                )
        by_parent: dict = defaultdict(list)
        for n in level:
            by_parent[n.parent].append(n)
        for parent, sibs in by_parent.items():
            labels = [s.label for s in sibs]
            if len(set(labels)) != len(labels):
                dup = [s.id for s in sibs if labels.count(s.label) > 1]
                out.append(Violation("c1", "duplicate-sibling-label", tuple(dup), "siblings share a label"))
    return out


# -- restriction and embeddings ----------------------------------------------


def restrict(T: LexTree, A: Iterable[int]) -> LexTree:
    """T restricted to the heights in A, reindexed consecutively.

    Parents become ancestors at the previous retained height. Sibling labels
    are fresh integers 0, 1, ... in the lexicographic order of the label
    sequences between retained heights.
    """
    heights = sorted(set(A))
    if not heights:
        raise PreconditionError("restrict needs a nonempty set of heights")
    if heights[0] < 0 or heights[-1] > T.height:
        raise PreconditionError(f"heights {heights} outside 0..{T.height}")
    levels = []
    prev = None
    for h in heights:
        groups: dict = defaultdict(list)
        for x in T.level_ids(h):
            path = T.path(x)
            parent = None if prev is None else path[prev]
            start = 0 if prev is None else prev + 1
            groups[parent].append((tuple(T.label(y) for y in path[start:]), x))
        level = []
        for parent, members in groups.items():
            for rank, (_, x) in enumerate(sorted(members)):
                level.append(Node(x, parent, Fraction(rank)))
        levels.append(tuple(level))
        prev = h
    return LexTree(tuple(levels))


def lex_compare_branches(a: Branch, b: Branch, T: LexTree) -> int:
    if not (T.is_branch(a) and T.is_branch(b)):
        raise PreconditionError("both branches must belong to the tree")
    for x, y in zip(a.nodes, b.nodes):
        if x != y:
            lx, ly = T.label(x), T.label(y)
            return LESS if lx < ly else GREATER
    return EQUAL


def is_club_embedding(f: Mapping[str, str], source: LexTree, target: LexTree, C: Iterable[int]) -> bool:
    heights = sorted(set(C))
    if not heights or heights[0] < 0 or heights[-1] > min(source.height, target.height):
        raise PreconditionError("C must be a nonempty subset of both height ranges")
    dom = [x for h in heights for x in source.level_ids(h)]
    if any(x not in f for x in dom):
        raise PreconditionError("f must be defined on all of source restricted to C")
    images = [f[x] for x in dom]
    if len(set(images)) != len(images):
        return False
    for x in dom:
        y = f[x]
        if y not in target or target.level_of(y) != source.level_of(x):
            return False
    for x in dom:
        for y in dom:
            if x != y and source.is_le(x, y) and not target.is_le(f[x], f[y]):
                return False
    return True


# -- isomorphism families ---------------------------------------------------------


@dataclass(frozen=True)
class IsoFamily:
    """Cone isomorphisms pi[t, s]: cone(t) -> cone(s), for same-height t, s below `bound`."""

    maps: Mapping[tuple[str, str], Mapping[str, str]]
    bound: int

    def get(self, t: str, s: str):
        return self.maps.get((t, s))

    def __contains__(self, pair) -> bool:
        return pair in self.maps

    def __len__(self) -> int:
        return len(self.maps)


def apply_iso(family: IsoFamily, t: str, s: str, x: str) -> str:
    m = family.get(t, s)
    if m is None:
        raise PreconditionError(f"pair ({t}, {s}) not in the family")
    if x not in m:
        raise PreconditionError(f"{x} is outside cone({t})")
    return m[x]


def cone_iso(T: LexTree, t: str, s: str) -> dict[str, str] | None:
    """The unique lex-preserving tree isomorphism cone(t) -> cone(s), if any.

    Finite sibling sets make order isomorphisms rigid, so the map matches
    children rank by rank.
    """
    out = {}
    stack = [(t, s)]
    while stack:
        x, y = stack.pop()
        out[x] = y
        cx, cy = T.children(x), T.children(y)
        if len(cx) != len(cy):
            return None
        stack.extend(zip(cx, cy))
    return out


def canonical_family(T: LexTree, bound: int) -> IsoFamily:
    """The full family over all same-height pairs at heights below `bound`."""
    maps = {}
    for h in range(min(bound, len(T.levels))):
        ids = T.level_ids(h)
        for t in ids:
            for s in ids:
                m = cone_iso(T, t, s)
                if m is None:
                    raise PreconditionError(f"cones of {t} and {s} are not isomorphic")
                maps[(t, s)] = m
    return IsoFamily(maps, bound)


def validate_family(T: LexTree, family: IsoFamily, complete: bool = False) -> list[Violation]:
    """Check level/parent/lex preservation plus symmetry, coherence and composition.

    Missing maps are reported under the law that needs them: symmetry (c5)
    when only one direction exists, coherence (c4) or composition (c7) when
    those laws demand the pair. With `complete`, any remaining same-height
    pair below the bound that has neither direction is reported under c3.
    """
    out: list[Violation] = []
    maps = family.maps
    good: dict[tuple[str, str], Mapping[str, str]] = {}

    for (t, s), m in maps.items():
        if t not in T or s not in T:
            out.append(Violation("c3", "bad-pair", (t, s), "pair references unknown nodes"))
            continue
        h = T.level_of(t)
        if T.level_of(s) != h or h >= family.bound:
            out.append(Violation("c3", "bad-pair", (t, s), "pair not of equal height below the bound"))
            continue
        ct, cs = T.cone(t), T.cone(s)
        if set(m) != set(ct) or sorted(m.values()) != sorted(cs) or len(set(m.values())) != len(m):
            out.append(Violation("c3", "not-cone-bijection", (t, s), "map is not a bijection of cones"))
            continue
        bad = False
        for x in ct:
            y = m[x]
            if T.level_of(x) != T.level_of(y):
                out.append(Violation("c3", "level-violation", (t, s, x), f"{x} -> {y} changes level"))
                bad = True
            elif x != t and m.get(T.parent(x)) != T.parent(y):
                out.append(Violation("c3", "parent-violation", (t, s, x), f"{x} -> {y} breaks parent"))
                bad = True
        for x in ct:
            kids = T.children(x)
            for a, b in zip(kids, kids[1:]):
                if T.label(a) < T.label(b) and not T.label(m[a]) < T.label(m[b]):
                    out.append(Violation("c3", "lex-violation", (t, s, a, b), "sibling order not preserved"))
                    bad = True
        if not bad:
            good[(t, s)] = m

    demanded: set[tuple[str, str]] = set()

    # symmetry
    for (t, s), m in good.items():
        back = maps.get((s, t))
        if back is None:
            out.append(Violation("c5", "symmetry-missing", (t, s), f"pi[{s},{t}] missing"))
            demanded.add((s, t))
        elif (s, t) in good and any(back.get(y) != x for x, y in m.items()):
            out.append(Violation("c5", "symmetry-violation", (t, s), f"pi[{s},{t}] is not the inverse"))

    # coherence
    for (t, s), m in good.items():
        for x in T.cone(t):
            if x == t or T.level_of(x) >= family.bound:
                continue
            y = m[x]
            sub = maps.get((x, y))
            if sub is None:
                if (x, y) not in demanded:
                    out.append(Violation("c4", "coherence-missing", (t, s, x, y), f"pi[{x},{y}] missing"))
                    demanded.add((x, y))
            elif (x, y) in good and any(sub.get(z) != m[z] for z in T.cone(x)):
                out.append(Violation("c4", "coherence-violation", (t, s, x, y),
                                     f"pi[{x},{y}] differs from pi[{t},{s}] on cone({x})"))

    # composition (identity included: t -> s -> t demands pi[t,t] = id)
    by_source: dict[str, list[str]] = defaultdict(list)
    for (t, s) in good:
        by_source[t].append(s)
    for t, mids in by_source.items():
        for s in mids:
            for u in by_source.get(s, ()):
                direct = maps.get((t, u))
                if direct is None:
                    if (t, u) not in demanded:
                        out.append(Violation("c7", "composition-missing", (t, s, u), f"pi[{t},{u}] missing"))
                        demanded.add((t, u))
                    continue
                if (t, u) not in good:
                    continue
                first, second = good[(t, s)], good[(s, u)]
                if any(second[first[x]] != direct[x] for x in first):
                    out.append(Violation("c7", "composition-violation", (t, s, u),
                                         f"pi[{s},{u}] o pi[{t},{s}] != pi[{t},{u}]"))
    for (t, s), m in good.items():
        if t == s and any(x != y for x, y in m.items()):
            out.append(Violation("c7", "identity-violation", (t,), f"pi[{t},{t}] is not the identity"))

    if complete:
        for h in range(min(family.bound, len(T.levels))):
            ids = T.level_ids(h)
            for i, t in enumerate(ids):
                for s in ids[i:]:
                    if (t, s) in maps or (s, t) in maps:
                        continue
                    if (t, s) in demanded or (s, t) in demanded:
                        continue
                    out.append(Violation("c3", "missing-pair", (t, s), f"no map between {t} and {s}"))
    return out


def top_relation_classes(T: LexTree, family: IsoFamily, nodes: Iterable[str]) -> dict[str, int]:
    """Group `nodes` by the equivalence generated by u ~ pi(u) over all family maps."""
    from ._common import UnionFind

    uf = UnionFind()
    wanted = set(nodes)
    for x in wanted:
        uf.find(x)
    for m in family.maps.values():
        for x in wanted:
            y = m.get(x)
            if y is not None and y in wanted:
                uf.union(x, y)
    groups = sorted(sorted(g) for g in uf.groups())
    return {x: i for i, g in enumerate(groups) for x in g}
