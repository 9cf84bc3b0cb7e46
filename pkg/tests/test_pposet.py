import pytest

from forcelab._common import ConstructionError, PreconditionError, clauses
from forcelab.capture import CaptureSet
from forcelab.pposet import PAmbient, PCondition, p_extends, p_lower_bound, validate_pcondition

from instances import four_leaf_tree, p_amb, tree


def Z(*branches):
    return CaptureSet.of(branches=branches)


def three_branch_amb(allow=False):
    T = tree([("r", None, 0)], [("a", "r", 0), ("b", "r", 1)], [("a0", "a", 0), ("a1", "a", 1), ("b0", "b", 0)])
    bs = {i: T.branch_to(x) for i, x in enumerate(["a0", "a1", "b0"])}
    return PAmbient(T, bs, frozenset(bs), allow)


class TestValidate:
    def test_examples(self):
        amb = p_amb()
        b = amb.branches
        assert validate_pcondition(amb, PCondition((Z(b[0]),))) == []
        assert validate_pcondition(amb, PCondition((Z(b[0], b[2]), Z(*b.values())))) == []
        assert clauses(validate_pcondition(amb, PCondition((Z(b[0], b[1]),)))) == {"not-capturing"}
        assert clauses(validate_pcondition(amb, PCondition(()))) == {"not-increasing"}

    def test_empty_and_foreign(self):
        amb = p_amb()
        assert clauses(validate_pcondition(amb, PCondition((Z(),)))) == {"not-capturing"}
        sub = PAmbient(amb.tree, amb.branches, frozenset({0, 2}))
        assert clauses(validate_pcondition(sub, PCondition((Z(amb.branches[1]),)))) == {"not-capturing"}

    def test_subtree_follows_L(self):
        amb = p_amb()
        sub = PAmbient(amb.tree, amb.branches, frozenset({0, 1}))
        assert sub.subtree().level_ids(1) == ["r.0"]
        assert validate_pcondition(sub, PCondition((Z(amb.branches[0], amb.branches[1]),))) == []

    def test_closure_branches(self):
        T = four_leaf_tree()
        bs = {0: T.branch_to("r.0.0"), 1: T.branch_to("r.1.1")}
        strict = PAmbient(T, bs, frozenset(bs))
        loose = PAmbient(T, bs, frozenset(bs), allow_closure_branches=True)
        assert strict.admissible_branches() == loose.admissible_branches()
        assert loose.subtree().branches() == strict.subtree().branches()


class TestExtends:
    def test_partial_order(self):
        amb = p_amb()
        b = amb.branches
        p = PCondition((Z(b[0]),))
        q = PCondition((Z(b[0]), Z(b[0], b[2])))
        r = PCondition((Z(b[0]), Z(b[0], b[2]), Z(*b.values())))
        for x in (p, q, r):
            assert p_extends(x, x) == []
        assert p_extends(q, p) == [] and p_extends(r, q) == [] and p_extends(r, p) == []
        assert p_extends(p, q)
        assert p_extends(PCondition((Z(b[2]),)), p)


class TestLowerBound:
    def test_chain_of_one(self):
        amb = p_amb()
        p = PCondition((Z(amb.branches[0]),))
        q = p_lower_bound(amb, [p])
        assert q.seq == (p.seq[0], p.seq[0])
        assert validate_pcondition(amb, q) == [] and p_extends(q, p) == []

    def test_union_on_top(self):
        amb = p_amb()
        b = amb.branches
        p = PCondition((Z(b[0]),))
        q = PCondition((Z(b[0]), Z(b[0], b[2])))
        r = p_lower_bound(amb, [p, q])
        assert r.seq[-1] == Z(b[0], b[2])
        assert validate_pcondition(amb, r) == []

    def test_limit_not_capturing(self):
        amb = three_branch_amb()
        b = amb.branches
        p, q = PCondition((Z(b[0]),)), PCondition((Z(b[1]),))
        assert validate_pcondition(amb, p) == [] and validate_pcondition(amb, q) == []
        with pytest.raises(ConstructionError) as e:
            p_lower_bound(amb, [p, q])
        assert e.value.code == "limit-not-capturing"

    def test_non_chain_with_capturing_union(self):
        amb = three_branch_amb()
        b = amb.branches
        with pytest.raises(PreconditionError):
            p_lower_bound(amb, [PCondition((Z(b[0]),)), PCondition((Z(b[2]),))])

    def test_empty_chain(self):
        with pytest.raises(PreconditionError):
            p_lower_bound(p_amb(), [])
