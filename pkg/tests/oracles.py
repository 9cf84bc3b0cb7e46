"""Brute-force reference implementations used to check the library.

These follow the definitions directly and share no code with forcelab.
"""

from __future__ import annotations

from itertools import combinations


def captures_bf(cuts, positions, x) -> bool:
    inside = [p for p in positions if p in cuts]
    for z in cuts:
        blocked = False
        for y in inside:
            if (x < y < z) or (z < y < x):
                blocked = True
                break
        if not blocked:
            return True
    return False


def in_omega_bf(cuts, positions) -> bool:
    for x in positions:
        if not captures_bf(cuts, positions, x):
            return False
    return True


def gamma_bf(positions, universe, k):
    """k-subsets of the universe, by bitmask, that fail to capture some position."""
    pts = sorted(set(universe))
    out = set()
    for mask in range(1 << len(pts)):
        chosen = [pts[i] for i in range(len(pts)) if mask >> i & 1]
        if len(chosen) == k and not in_omega_bf(set(chosen), positions):
            out.add(frozenset(chosen))
    return out


def delta_system_bf(domains):
    """Largest subfamily with a common pairwise intersection; ties by first positions."""
    sets = [frozenset(d) for d in domains]
    n = len(sets)
    best = None
    for mask in range(1, 1 << n):
        pos = tuple(i for i in range(n) if mask >> i & 1)
        if len(pos) == 1:
            root = sets[pos[0]]
        else:
            inters = {sets[i] & sets[j] for i in pos for j in pos if i < j}
            if len(inters) != 1:
                continue
            root = next(iter(inters))
        key = (-len(pos), pos)
        if best is None or key < best[0]:
            best = (key, pos, root)
    return best[2], best[1]


def gap_classes_bf(order_ids, sub, k):
    """Transitive closure of 'at most k ambient points strictly between', by Warshall."""
    idx = {e: i for i, e in enumerate(order_ids)}
    elems = sorted(sub, key=idx.__getitem__)
    n = len(elems)
    reach = [[i == j or abs(idx[elems[i]] - idx[elems[j]]) - 1 <= k for j in range(n)] for i in range(n)]
    for m in range(n):
        for i in range(n):
            if reach[i][m]:
                for j in range(n):
                    if reach[m][j]:
                        reach[i][j] = True
    classes, seen = [], set()
    for i in range(n):
        if i in seen:
            continue
        cls = [elems[j] for j in range(n) if reach[i][j]]
        seen.update(j for j in range(n) if reach[i][j])
        classes.append(cls)
    return classes


def contains_eta(term) -> bool:
    """Structural search for an Eta node by class name."""
    if type(term).__name__ == "Eta":
        return True
    kids = getattr(term, "children", None)
    if kids is not None:
        return any(contains_eta(t) for t in kids)
    body = getattr(term, "body", None)
    return body is not None and contains_eta(body)


def label_path(T, b):
    return tuple(T.label(x) for x in b.nodes)


def is_strict_total(elems, cmp) -> bool:
    for a, b in combinations(elems, 2):
        if cmp(a, b) == 0 or cmp(a, b) != -cmp(b, a):
            return False
    for a in elems:
        for b in elems:
            for c in elems:
                if cmp(a, b) < 0 and cmp(b, c) < 0 and not cmp(a, c) < 0:
                    return False
    return True
