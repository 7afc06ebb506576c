import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from conftest import indices, trees
from nsmb.calculus import (
    CheckResult,
    Focus,
    Proof,
    RuleId,
    check_proof,
    is_axiom,
    mbp_cond1,
    mbp_cond2,
    modal_precedes,
    proof_from_dict,
    proof_to_dict,
    proof_to_latex,
)
from nsmb.syntax import Kind, Logic, ModalIdx, add_child, idx, ns, parse_formula, parse_ns

F = parse_formula
GOLDEN = Path(__file__).resolve().parent.parent / "proofs" / "golden_example.json"
GRID = [Fraction(k, 4) for k in range(5)]
IDX = [ModalIdx(k, v) for v in GRID for k in (Kind.C, Kind.O)]


def golden(bracket="1/2"):
    """The four-rule derivation of p => [c,1/2]<o,3/10>p, principal formulas dropped."""
    b = f"[c,{bracket}]"
    n4 = parse_ns(f"p => p {{ {b}: ( => ) }}")
    n3 = parse_ns(f"p, ~p => {{ {b}: ( => ) }}")
    n2 = parse_ns(f"p => {{ {b}: ( [o,3/10]~p => ) }}")
    n1 = parse_ns(f"p => {{ {b}: ( => <o,3/10>p ) }}")
    n0 = parse_ns(f"p => {b}<o,3/10>p")
    ax = Proof(n4, RuleId.AXIOM_ID, Focus((), F("p")))
    p3 = Proof(n3, RuleId.NEG_L, Focus((), F("~p")), (ax,))
    p2 = Proof(n2, RuleId.BOX_L_SYM, Focus((0,), F("[o,3/10]~p"), ()), (p3,))
    p1 = Proof(n1, RuleId.NEG_R, Focus((0,), F("<o,3/10>p")), (p2,))
    return Proof(n0, RuleId.BOX_R, Focus((), F(f"{b}<o,3/10>p")), (p1,))


def test_precedes_cross_kind():
    assert modal_precedes(idx("o", Fraction(3, 10)), idx("c", Fraction(1, 2)))
    assert modal_precedes(idx("c", Fraction(1, 2)), idx("o", Fraction(1, 2)))
    assert not modal_precedes(idx("o", Fraction(1, 2)), idx("c", Fraction(1, 2)))


def test_precedes_is_total_order_on_grid():
    for a in IDX:
        assert modal_precedes(a, a)
        for b in IDX:
            assert modal_precedes(a, b) or modal_precedes(b, a)
            if a != b and modal_precedes(a, b):
                assert not modal_precedes(b, a)
            for c in IDX:
                if modal_precedes(a, b) and modal_precedes(b, c):
                    assert modal_precedes(a, c)


def _above(ix, xs):
    return {x for x in xs if (x >= ix.value if ix.kind is Kind.C else x > ix.value)}


def test_precedes_is_reverse_threshold_inclusion():
    dense = [Fraction(k, 16) for k in range(17)]
    for a in IDX:
        for b in IDX:
            assert modal_precedes(a, b) == (_above(b, dense) <= _above(a, dense))


def test_o1_is_maximum():
    top = idx("o", 1)
    assert all(modal_precedes(a, top) for a in IDX)
    assert [a for a in IDX if all(modal_precedes(b, a) for b in IDX)] == [top]


def test_mbplus_conditions():
    h, s = Fraction(1, 2), Fraction(7, 10)
    assert mbp_cond1(idx("=", h), idx("=", h))
    assert not mbp_cond1(idx("=", h), idx("=", s))
    assert mbp_cond1(idx("o", Fraction(3, 10)), idx("=", h))
    assert not mbp_cond1(idx("o", h), idx("=", h))
    assert mbp_cond1(idx("o", Fraction(3, 10)), idx("o", h))
    assert not mbp_cond1(idx("=", h), idx("o", s))
    assert not mbp_cond1(idx("c", 0), idx("=", h))
    assert mbp_cond2(idx("=", 1))
    assert not mbp_cond2(idx("o", 1))
    assert mbp_cond2(idx("o", h))
    assert not mbp_cond2(idx("=", h))


def test_mbplus_oo_allows_equal_values():
    # [o,a]A must reach a child under [o,a]: the bracket already forces R > a
    a = Fraction(1, 4)
    assert mbp_cond1(idx("o", a), idx("o", a))


@pytest.mark.parametrize(
    "text,rule,path",
    [
        ("p => p", RuleId.AXIOM_ID, ()),
        ("q => r { [c,1/2]: ( => [o,1]p ) }", RuleId.AXIOM_BOXO1, (0,)),
        ("=> T", RuleId.AXIOM_TOP, ()),
        ("F =>", RuleId.AXIOM_BOT, ()),
    ],
)
def test_is_axiom(text, rule, path):
    hit = is_axiom(parse_ns(text))
    assert hit is not None and hit[0] is rule and hit[1] == path


def test_not_axiom():
    assert is_axiom(parse_ns("p => q")) is None


def test_golden_derivation_accepted():
    p = golden()
    assert check_proof(p)
    assert p.rules() == [RuleId.BOX_R, RuleId.NEG_R, RuleId.BOX_L_SYM, RuleId.NEG_L, RuleId.AXIOM_ID]


def test_golden_with_small_bracket_rejected():
    res = check_proof(golden("1/5"))
    assert not res
    assert res.rule is RuleId.BOX_L_SYM and res.path == (0,)
    assert "side condition" in res.reason


def test_weakening_step():
    ax = Proof(parse_ns("p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    p = Proof(parse_ns("p, q => p"), RuleId.WL, Focus((), F("q")), (ax,))
    assert check_proof(p)


def test_cut_accepted():
    # p & q => p via cut on p
    c = parse_ns("p & q => p")
    left = Proof(
        parse_ns("p & q => p"), RuleId.AND_L, Focus((), F("p & q")),
        (Proof(parse_ns("p, q => p"), RuleId.AXIOM_ID, Focus((), F("p"))),),
    )
    right = Proof(parse_ns("p & q, p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    p = Proof(c, RuleId.CUT, Focus((), F("p")), (left, right))
    assert check_proof(p) and p.uses_cut()


def test_wrong_arity_rejected():
    p = Proof(parse_ns("p => p"), RuleId.NEG_L, Focus((), F("p")), ())
    res = check_proof(p)
    assert not res and "premise" in res.reason


def test_rule_misapplied():
    ax = Proof(parse_ns("p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    p = Proof(parse_ns("~p => "), RuleId.NEG_R, Focus((), F("~p")), (ax,))
    assert not check_proof(p)


def test_premise_mismatch_reported():
    ax = Proof(parse_ns("q => q"), RuleId.AXIOM_ID, Focus((), F("q")))
    p = Proof(parse_ns("~p => q"), RuleId.NEG_L, Focus((), F("~p")), (ax,))
    res = check_proof(p)
    assert not res and res.rule is RuleId.NEG_L


def test_bad_axiom_rejected():
    assert not check_proof(Proof(parse_ns("p => q"), RuleId.AXIOM_ID, Focus((), F("p"))))


def test_box_r_needs_value_below_one():
    concl = parse_ns("=> [c,1]p")
    bad_child = add_child(concl, (), idx("c", 1), ns((), [F("p")]))  # unparseable bracket
    prem = Proof(bad_child, RuleId.AXIOM_TOP, Focus((), F("T")))
    res = check_proof(Proof(concl, RuleId.BOX_R, Focus((), F("[c,1]p")), (prem,)))
    assert not res and "differ from 1" in res.reason


def test_self_rules_mode_specific():
    ax = Proof(parse_ns("p => p", Logic.MBPLUS), RuleId.AXIOM_ID, Focus((), F("p")))
    mb_rule = Proof(parse_ns("p => [=,1]p", Logic.MBPLUS), RuleId.BOX_R_SELF, Focus((), F("[=,1]p", Logic.MBPLUS)), (ax,))
    assert not check_proof(mb_rule, Logic.MBPLUS)
    eq_rule = Proof(mb_rule.conclusion, RuleId.EQ_R_SELF, mb_rule.focus, (ax,))
    assert check_proof(eq_rule, Logic.MBPLUS)


def test_box_l_self_condition():
    ax = Proof(parse_ns("p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    ok = Proof(parse_ns("[o,1/2]p => p"), RuleId.BOX_L_SELF, Focus((), F("[o,1/2]p")), (ax,))
    bad = Proof(parse_ns("[o,1]p => p"), RuleId.BOX_L_SELF, Focus((), F("[o,1]p")), (ax,))
    assert check_proof(ok)
    assert not check_proof(bad)


def test_box_c0_same_node_and_far_node():
    ax = Proof(parse_ns("p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    same = Proof(parse_ns("[c,0]p => p"), RuleId.BOX_C0, Focus((), F("[c,0]p"), ()), (ax,))
    assert check_proof(same)
    far = parse_ns("=> { [c,1/2]: ( => { [o,0]: ( [c,0]q => ) } ), [o,1/4]: ( => q ) }")
    prem = parse_ns("=> { [c,1/2]: ( => { [o,0]: ( => ) } ), [o,1/4]: ( q => q ) }")
    p = Proof(far, RuleId.BOX_C0, Focus((0, 0), F("[c,0]q"), (1,)), (Proof(prem, RuleId.AXIOM_ID, Focus((1,), F("q"))),))
    assert check_proof(p)


def test_json_round_trip():
    p = golden()
    d = json.loads(json.dumps(proof_to_dict(p)))
    q = proof_from_dict(d)
    assert check_proof(q)
    assert proof_to_dict(q) == proof_to_dict(p)


def test_golden_file_matches():
    d = json.loads(GOLDEN.read_text())
    p = proof_from_dict(d)
    assert check_proof(p)
    assert p.rules() == golden().rules()


def test_latex_export():
    tex = proof_to_latex(golden())
    assert tex.count(r"\UnaryInfC") == 4 and tex.count(r"\AxiomC") == 1
    assert r"\Box^{c}_{1/2}" in tex


def test_check_result_text():
    assert str(CheckResult(True)) == "proof accepted"
    assert "BoxR" in str(CheckResult(False, RuleId.BOX_R, (0,), "x"))


@given(st.lists(indices(), min_size=2, max_size=2))
def test_precedes_matches_threshold_inclusion_random(pair):
    a, b = pair
    dense = [Fraction(k, 8) for k in range(9)]
    assert modal_precedes(a, b) == (_above(b, dense) <= _above(a, dense))
