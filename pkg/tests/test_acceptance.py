"""Acceptance criteria, one test each, with their time limits.

Each test records a PASS/FAIL line (shown in the terminal summary). Run
directly with ``python tests/test_acceptance.py`` to print just those lines.
"""

from __future__ import annotations

import json
import random
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

from forcelab._common import clauses, derive_seed
from forcelab.capture import (
    CaptureSet,
    gamma_members,
    in_omega,
    in_omega_tree,
    tree_delta,
)
from forcelab.fileformat import Report, Scenario, Step, TermFile, dumps, loads
from forcelab.fposet import f_extends, f_limit_lower_bound, f_mirror_amalgamate, mirror, validate_fcondition
from forcelab.hposet import (
    amalgamate,
    assemble_generic,
    delta_system,
    extends,
    limit_lower_bound,
    validate_condition,
)
from forcelab.lextree import lex_compare_branches, validate_family
from forcelab.order import (
    Eta,
    Fin,
    LinOrder,
    Omega,
    OmegaStar,
    OmegaStarSum,
    OmegaSum,
    Sum,
    gap_quotient,
    hausdorff_rank,
    is_scattered,
)
from forcelab.scenario import run_scenario

import gen
import oracles
from instances import MUTATIONS


def _record(log, n, title, ok, elapsed, limit, detail=""):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    log(f"{status} criterion {n}: {title} ({elapsed:.2f}s, limit {limit}s){' - ' + detail if detail else ''}")


# -- 1 -------------------------------------------------------------------------------------


def criterion_1():
    failures = []
    for name, tag, run in MUTATIONS:
        base, mutant = run(False), run(True)
        if base or clauses(mutant) != {tag}:
            failures.append(f"{name}: base={sorted(clauses(base))} mutant={sorted(clauses(mutant))}")
    return not failures and len(MUTATIONS) == 20, f"{len(MUTATIONS)} mutations; {failures[:3]}"


# -- 2 -------------------------------------------------------------------------------------


def criterion_2(n=1000):
    failures = 0
    for s in range(n):
        chain = gen.random_h_chain(random.Random(derive_seed(2, s)))
        q = limit_lower_bound(chain)
        bad = validate_condition(q)
        for c in chain:
            bad += extends(q, c, validate=False)
        if bad or q.alpha > 6:
            failures += 1
    return failures == 0, f"{n} chains, {failures} failures"


# -- 3 -------------------------------------------------------------------------------------


def criterion_3(n=200):
    failures, pairs = [], 0
    for s in range(n):
        fam = gen.delta_family(random.Random(derive_seed(3, s)))
        domains = [sorted(c.dom) for c in fam]
        ds = delta_system(domains)
        chosen = [frozenset(domains[i]) for i in ds.positions]
        if any(a & b != ds.root for a, b in combinations(chosen, 2)):
            failures.append((s, "intersection"))
        if len(chosen) == 1 and chosen[0] != ds.root:
            failures.append((s, "singleton-root"))
        if len(fam) <= 8 and oracles.delta_system_bf(domains) != (ds.root, ds.positions):
            failures.append((s, "oracle"))
        for i, j in combinations(ds.positions, 2):
            p, q = fam[i], fam[j]
            r = amalgamate(p, q)
            pairs += 1
            if validate_condition(r) or extends(r, p, validate=False) or extends(r, q, validate=False):
                failures.append((s, "amalgamate", i, j))
    return not failures, f"{n} families, {pairs} amalgamations, failures {failures[:3]}"


# -- 4 -------------------------------------------------------------------------------------


def _f_trial(rng):
    amb, classes = gen.f_ambient(rng)
    delta = amb.tree.height
    chain = gen.random_f_chain(rng, amb, classes, delta)
    problems = []
    q = f_limit_lower_bound(amb, chain, delta)
    if validate_fcondition(amb, q) or any(f_extends(q, c) for c in chain):
        problems.append("limit")
    level = amb.tree.level_ids(delta)
    top = {x: q.f[x] for x in level}
    if sorted(top.values()) != sorted(level):
        problems.append("level-bijection")
    same = f_mirror_amalgamate(amb, chain, {}, delta)
    if (same.A, dict(same.f), dict(same.phi)) != (q.A, dict(q.f), dict(q.phi)):
        problems.append("identity-mirror")
    used = sorted({x for c in chain for x in list(c.phi) + list(c.phi.values())})
    slot = {}
    for cls in classes:
        slot.update({cls[0]: cls[2], cls[1]: cls[3]})
    h = {x: slot[x] for x in used}
    r = f_mirror_amalgamate(amb, chain, h, delta)
    mirrored = [mirror(c, h) for c in chain]
    if validate_fcondition(amb, r) or any(f_extends(r, c) for c in chain + mirrored):
        problems.append("mirror")
    return problems


def criterion_4(n=500):
    failures = []
    for s in range(n):
        problems = _f_trial(random.Random(derive_seed(4, s)))
        if problems:
            failures.append((s, problems))
    return not failures, f"{n} chains, failures {failures[:3]}"


# -- 5 -------------------------------------------------------------------------------------

UNIVERSE7 = [Fraction(x, 2) for x in (-3, -1, 0, 1, 2, 5, 9)]


def criterion_5():
    cases, bad = 0, []
    for m in range(1, 8):
        universe = UNIVERSE7[:m]
        for size in range(0, min(5, m) + 1):
            for pos in combinations(universe, size):
                L = LinOrder.from_positions(pos)
                for k in range(0, min(4, m) + 1):
                    expected_gamma = oracles.gamma_bf(pos, universe, k)
                    got = gamma_members(L, universe, k)
                    if set(got) != expected_gamma or len(got) != len(expected_gamma):
                        bad.append(("gamma", pos, k))
                    for Z in combinations(universe, k):
                        cases += 1
                        omega = in_omega(CaptureSet.of(Z), L)
                        if omega != oracles.in_omega_bf(set(Z), pos):
                            bad.append(("omega", pos, Z))
                        if set(Z) & set(pos) and not omega:
                            bad.append(("triviality", pos, Z))
    return not bad, f"{cases} (L, Z) cases, mismatches {bad[:3]}"


# -- 6 -------------------------------------------------------------------------------------


def criterion_6():
    T = gen.uniform_tree([2, 2, 2])
    by_leaf = {b.nodes[-1]: b for b in T.branches()}
    Z = CaptureSet.of(branches=[by_leaf["r.0.0.0"]])
    Zp = CaptureSet.of(branches=[by_leaf["r.0.0.0"], by_leaf["r.0.1.0"]])
    witness = Z <= Zp and in_omega_tree(Z, T) and not in_omega_tree(Zp, T)
    bad = []
    for t in T.node_ids:
        for b in T.branches():
            if (tree_delta(t, b, T) > T.level_of(t)) != (t in b.nodes):
                bad.append((t, b.nodes[-1]))
    return witness and not bad, f"witness={witness}, delta mismatches {bad[:3]}"


# -- 7 -------------------------------------------------------------------------------------


def _terms(depth, atoms, arities):
    if depth == 1:
        return list(atoms)
    smaller = _terms(depth - 1, atoms, arities)
    out = list(atoms)
    for a in arities:
        out.extend(Sum(kids) for kids in product(smaller, repeat=a))
    out.extend(OmegaSum(t) for t in smaller)
    out.extend(OmegaStarSum(t) for t in smaller)
    return out


def criterion_7():
    bad = []
    deep = _terms(4, [Fin(1), Omega(), Eta()], (2,))
    wide = _terms(3, [Fin(1), Fin(2), Omega(), OmegaStar(), Eta()], (1, 2))
    for t in deep + wide:
        if is_scattered(t) == oracles.contains_eta(t):
            bad.append(("scattered", t))
    t = Fin(1)
    for n in range(1, 6):
        t = OmegaSum(t)
        if hausdorff_rank(t) != n:
            bad.append(("rank", n))
    quotients = 0
    for size in range(0, 9):
        amb = LinOrder.from_positions(range(size))
        ids = amb.ids
        for mask in range(1 << size):
            sub = [ids[i] for i in range(size) if mask >> i & 1]
            for k in range(0, size + 1):
                quotients += 1
                got = gap_quotient(amb, sub, k)
                if got != oracles.gap_classes_bf(ids, sub, k):
                    bad.append(("gap", size, mask, k))
                rank = {e: i for i, e in enumerate(ids)}
                for cls in got:
                    lo, hi = rank[cls[0]], rank[cls[-1]]
                    between = [e for e in sub if lo <= rank[e] <= hi]
                    if between != cls:
                        bad.append(("convex", size, mask, k))
                if sorted(e for c in got for e in c) != sorted(sub):
                    bad.append(("partition", size, mask, k))
    return not bad, f"{len(deep) + len(wide)} terms, {quotients} quotients, problems {bad[:3]}"


# -- 8 -------------------------------------------------------------------------------------

GENERIC_INDICES = (3, 8, 14, 21, 27, 33, 40, 52)


def generic_scenario(seed=8) -> Scenario:
    steps = [
        Step("extend-height", {"target": 3, "fanout": 2}),
        Step("height-above", {"alpha": 5, "fanout": 1}),
    ] + [Step("index-in", {"index": xi, "fanout": 1}) for xi in GENERIC_INDICES]
    return Scenario("h", tuple(steps), ("validate", "extends", "family"), seed, name="generic")


def criterion_8():
    run = []
    report = run_scenario(generic_scenario(), sink=run)
    steps_ok = report.status == 0 and all(s["status"] == "ok" for s in report.steps)
    family_ok = all(not validate_family(q.tree, q.family, complete=True) for q in run)
    g = assemble_generic(run)
    bs = [g.branches[xi] for xi in GENERIC_INDICES]
    distinct = len({b.nodes for b in bs}) == len(bs) == 8
    cmp = lambda a, b: lex_compare_branches(a, b, g.tree)  # noqa: E731
    total = oracles.is_strict_total(bs, cmp)
    agrees = all(
        (cmp(a, b) < 0) == (oracles.label_path(g.tree, a) < oracles.label_path(g.tree, b))
        for a, b in combinations(bs, 2)
    )
    same_final = report.final["branch_count"] == 8 and report.final["tree"]["height"] == g.tree.height
    ok = steps_ok and family_ok and distinct and total and agrees and g.tree.height >= 6 and same_final
    return ok, f"height {g.tree.height}, distinct={distinct}, total={total}, family_ok={family_ok}"


# -- 9 -------------------------------------------------------------------------------------


def _values(rng):
    T = gen.random_tree(rng, rng.randint(0, 3), 2, roots=rng.randint(1, 2))
    chain = gen.random_h_chain(rng, max_len=3, max_alpha=3)
    amb, classes = gen.f_ambient(rng)
    f_chain = gen.random_f_chain(rng, amb, classes, amb.tree.height)
    p_amb, p_cond = gen.random_p(rng)
    scn = Scenario(
        rng.choice(["h", "f"]),
        tuple(Step(rng.choice(["index-in", "limit"]), {"index": rng.randint(0, 9)}) for _ in range(rng.randint(1, 3))),
        ("validate",),
        rng.choice([None, rng.randint(0, 99)]),
        ambient=rng.choice([None, "amb.json", amb]),
        initial=rng.choice([None, chain[0]]),
        club=tuple(sorted(rng.sample(range(9), 2))),
        name=f"s{rng.randint(0, 9)}",
    )
    rep = Report("h", rng.randint(0, 9), ({"step": 0, "op": "limit", "violations": []},), {"alpha": 1}, 0, "x")
    return [
        gen.random_linorder(rng),
        gen.random_ladders(rng),
        TermFile(gen.random_term(rng, rng.randint(1, 4))),
        T,
        rng.choice(T.branches()),
        chain[-1].family,
        chain[-1],
        amb,
        f_chain[-1],
        gen.random_captureset(rng, T),
        gen.random_trace(rng),
        p_amb,
        p_cond,
        scn,
        rep,
    ]


def criterion_9(n=1000):
    bad, count, kinds = [], 0, set()
    rng = random.Random(derive_seed(9))
    for _ in range(n):
        for v in _values(rng):
            count += 1
            kinds.add(type(v).__name__)
            text = dumps(v)
            back = loads(text)
            if back != v or dumps(back) != text:
                bad.append(type(v).__name__)
    a = dumps(run_scenario(generic_scenario(5)))
    b = dumps(run_scenario(generic_scenario(5)))
    c = dumps(run_scenario(generic_scenario(6)))
    deterministic = a == b and json.loads(a)["seed"] == 5 and a != c
    ok = not bad and deterministic and len(kinds) == 15
    return ok, f"{count} round trips over {len(kinds)} kinds, mismatches {bad[:3]}, deterministic={deterministic}"


# -- pytest wiring ----------------------------------------------------------------------------

CRITERIA = [
    (1, "clause-validator mutation suite", criterion_1, 1),
    (2, "limit lower bounds of H chains", criterion_2, 30),
    (3, "delta-system and amalgamation", criterion_3, 30),
    (4, "F lower bounds and mirror amalgamation", criterion_4, 30),
    (5, "order capture oracle equivalence", criterion_5, 10),
    (6, "tree-capture nontriviality", criterion_6, 1),
    (7, "order algebra", criterion_7, 10),
    (8, "generic assembly", criterion_8, 5),
    (9, "serialization round trip and determinism", criterion_9, 10),
]


def _run(n, title, fn, limit):
    start = time.perf_counter()
    ok, detail = fn()
    return ok, time.perf_counter() - start, detail


@pytest.mark.parametrize("n,title,fn,limit", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(n, title, fn, limit, acceptance_log):
    ok, elapsed, detail = _run(n, title, fn, limit)
    _record(acceptance_log, n, title, ok, elapsed, limit, detail)
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


if __name__ == "__main__":
    for n, title, fn, limit in CRITERIA:
        ok, elapsed, detail = _run(n, title, fn, limit)
        _record(print, n, title, ok, elapsed, limit, detail)
