import random

import pytest
from hypothesis import given, settings

from conftest import trees
from nsmb.calculus import RuleId, check_proof
from nsmb.prover import (
    PRIORITY,
    SearchState,
    StepBudgetExceeded,
    is_blocked,
    prove,
    provable,
    saturation_steps,
    step_bound,
)
from nsmb.syntax import Logic, nodes, ns, parse_formula, parse_ns, print_ns

F = parse_formula


def _ids(rules):
    return [r.value for r in rules]


def test_golden_example():
    v = prove(parse_ns("p => [c,1/2]<o,3/10>p"))
    assert v.provable
    assert _ids(v.proof.rules()) == ["BoxR", "NegR", "BoxLSym", "NegL", "Axiom-Id"]
    assert check_proof(v.proof)
    assert check_proof(v.raw_proof)


def test_axiom_immediately():
    v = prove(parse_ns("=> [o,1]p"))
    assert v.provable and v.steps == 0 and v.proof.rule is RuleId.AXIOM_BOXO1


def test_neg_left_instance():
    st = SearchState.start(parse_ns("~p =>"))
    inst = saturation_steps(st)
    assert [(i.step, i.rule) for i in inst] == [(3, RuleId.NEG_L)]


def test_universal_box_instances():
    st = SearchState.start(parse_ns("[c,0]p => { [o,1/10]: ( q => ) }"))
    got = {(i.step, i.path, i.target) for i in saturation_steps(st)}
    assert (10, (), ()) in got and (10, (), (0,)) in got
    assert (7, (), None) in got
    # priority: step 7 comes before step 10
    steps = [i.step for i in saturation_steps(st)]
    assert steps.index(7) < steps.index(10)


def test_priority_order():
    assert PRIORITY == (1, 3, 4, 7, 9, 10, 5, 6, 8, 2)


def test_and_right_last():
    st = SearchState.start(parse_ns("~p => q & r"))
    assert [i.step for i in saturation_steps(st)] == [3, 2]


def test_unprovable_saturated_shape():
    v = prove(parse_ns("[c,7/10]p => [c,1/2]p"))
    assert not v.provable
    sat = v.saturated
    assert sat.left == {F("[c,7/10]p"), F("p")}
    assert sat.right == {F("[c,1/2]p")}
    assert len(sat.children) == 1
    ix, child = sat.children[0]
    assert str(ix) == "c,1/2" and child.left == set() and child.right == {F("p")}
    assert saturation_steps(v.state) == []


def test_weaker_to_stronger_box():
    v = prove(parse_ns("[c,1/2]p => [c,7/10]p"))
    assert v.provable and RuleId.BOX_L in v.proof.rules()


@pytest.mark.parametrize("a", ["0", "1/2", "1"])
def test_box_c_reflexive(a):
    assert prove(parse_ns(f"[c,{a}]p => p")).provable


def test_box_c1_is_identity():
    assert prove(parse_ns("[c,1]p => p")).provable
    v = prove(parse_ns("p => [c,1]p"))
    assert v.provable and RuleId.BOX_R_SELF in v.proof.rules()


def test_symmetry_law():
    assert provable(F("p -> [c,1/2]<c,1/2>p"))


def test_implication_unprovable():
    assert not provable(F("p -> q"))


def test_mbplus_eq_self():
    v = prove(parse_ns("=> [=,1]p -> p", Logic.MBPLUS), Logic.MBPLUS)
    assert v.provable and check_proof(v.proof, Logic.MBPLUS)
    v = prove(parse_ns("p => [=,1]p", Logic.MBPLUS), Logic.MBPLUS)
    assert v.provable and RuleId.EQ_R_SELF in v.proof.rules()


def test_mbplus_o_under_o_bracket():
    t = parse_ns("[o,1/4]p => { [o,1/4]: ( => p ) }", Logic.MBPLUS)
    assert prove(t, Logic.MBPLUS).provable


def test_k_for_universal_box():
    assert provable(F("[c,0](p -> q) -> [c,0]p -> [c,0]q"))


def test_universal_box_terminates_with_blocking():
    t = parse_ns("[c,0]~[c,1/2]p =>")
    v = prove(t)
    assert not v.provable
    assert step_bound(t).admits(v.max_branch)
    deepest = max(len(p) for p, _ in nodes(v.saturated))
    assert deepest == 4
    assert is_blocked(v.saturated, (0, 0, 0, 0), frozenset({()}))


def test_budget():
    with pytest.raises(StepBudgetExceeded):
        prove(parse_ns("=> (p -> q) | (q -> p)"), max_steps=3)


def test_trace_json():
    v = prove(parse_ns("[c,7/10]p => [c,1/2]p"))
    assert v.trace_json() == [
        {"step": 7, "path": "/", "formula": "[c,7/10]p"},
        {"step": 8, "path": "/", "formula": "[c,1/2]p"},
    ]


def test_step_bound_small():
    b = step_bound(parse_ns("p => [c,1/2]<o,3/10>p"))
    assert b.exact is not None and b.admits(6) and b.created_depth == 2


def _monotone(before, inst, after):
    old = dict(nodes(before.current))
    for s in after:
        new = dict(nodes(s.current))
        for path, seq in old.items():
            assert seq.left <= new[path].left and seq.right <= new[path].right
        assert s.expanded_boxR >= before.expanded_boxR
        assert len(new) >= len(old)


@settings(max_examples=80)
@given(trees())
def test_search_grows_monotonically_and_proofs_check(t):
    v = prove(t, on_step=_monotone)
    assert step_bound(t).admits(v.max_branch)
    if v.provable:
        assert not v.proof.uses_cut()
        assert check_proof(v.proof)
        assert check_proof(v.raw_proof)
    else:
        assert saturation_steps(v.state) == []


@settings(max_examples=60)
@given(trees(Logic.MBPLUS))
def test_mbplus_search(t):
    v = prove(t, Logic.MBPLUS, on_step=_monotone)
    if v.provable:
        assert check_proof(v.proof, Logic.MBPLUS)


def _shuffle(t, rng):
    kids = [(ix, _shuffle(c, rng)) for ix, c in t.children]
    rng.shuffle(kids)
    left, right = sorted(t.left), sorted(t.right)
    rng.shuffle(left)
    rng.shuffle(right)
    return ns(left, right, kids)


@settings(max_examples=60)
@given(trees())
def test_verdict_invariant_under_permutation(t):
    rng = random.Random(print_ns(t))
    assert prove(t).provable == prove(_shuffle(t, rng)).provable
