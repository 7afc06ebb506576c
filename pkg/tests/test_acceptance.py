"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import time
from fractions import Fraction

import pytest

from nsmb.calculus import Focus, Proof, RuleId, check_proof
from nsmb.countermodel import countermodel_of, verify_countermodel
from nsmb.harness import (
    FuzzConfig,
    completeness_suite,
    decide_batch,
    mbplus_translation_suite,
    soundness_suite,
    tau_suite,
)
from nsmb.prover import prove
from nsmb.syntax import Logic, nodes, parse_formula, parse_ns

BATCH = dict(count=500, max_formula_depth=3, max_tree_depth=2, models=25, max_worlds=4)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def mb_batch():
    cfg = FuzzConfig(mode=Logic.MB, **BATCH)
    t0 = time.perf_counter()
    decided = decide_batch(cfg)
    return cfg, decided, time.perf_counter() - t0


@pytest.fixture(scope="module")
def mbp_batch():
    cfg = FuzzConfig(mode=Logic.MBPLUS, **BATCH)
    t0 = time.perf_counter()
    decided = decide_batch(cfg)
    return cfg, decided, time.perf_counter() - t0


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_1_golden_derivation(capsys):
    v, secs = timed(lambda: prove(parse_ns("p => [c,1/2]<o,3/10>p")))
    rules = [r.value for r in v.proof.rules()] if v.provable else []
    ok = (
        v.provable
        and rules == ["BoxR", "NegR", "BoxLSym", "NegL", "Axiom-Id"]
        and bool(check_proof(v.proof))
        and not v.proof.uses_cut()
        and secs < 1.0
    )
    report(capsys, 1, ok, f"rules={' '.join(rules)} checked={bool(check_proof(v.proof))} time={secs:.3f}s")


def test_criterion_2_battery(capsys):
    cases = [("=> [o,1]p", True)]
    cases += [(f"[c,{a}]p => p", True) for a in ("0", "1/2", "1")]
    cases += [("[c,1]p => p", True), ("p => [c,1]p", True), ("p => [c,1/2]<c,1/2>p", True)]
    cases += [("=> p", False), ("[c,7/10]p => [c,1/2]p", False), ("[c,1/2]p => [c,7/10]p", True)]
    bad = []
    worst = 0.0
    for text, expected in cases:
        t = parse_ns(text)
        v, secs = timed(lambda: prove(t))
        worst = max(worst, secs)
        if v.provable != expected or secs >= 1.0:
            bad.append(text)
            continue
        if v.provable:
            if not check_proof(v.proof):
                bad.append(text)
            continue
        cr = countermodel_of(v)
        if not verify_countermodel(t, cr):
            bad.append(text)
        elif text == "=> p" and len(cr.model.worlds) != 1:
            bad.append(text)
        elif text.startswith("[c,7/10]") and (
            len(cr.model.worlds) != 2 or cr.model.r("w0", "w1") != Fraction(1, 2)
        ):
            bad.append(text)
    report(capsys, 2, not bad, f"{len(cases) - len(bad)}/{len(cases)} ok, slowest {worst:.3f}s, failing={bad}")


def test_criterion_3_soundness(capsys, mb_batch):
    cfg, decided, decide_secs = mb_batch
    rep, secs = timed(lambda: soundness_suite(cfg, decided))
    total = decide_secs + secs
    ok = rep.ok and total < 60 and rep.stats["proofs_checked"] == rep.provable
    report(
        capsys, 3, ok,
        f"{rep.total} sequents, {rep.provable} provable, {len(rep.violations)} violations, {total:.1f}s",
    )


def test_criterion_4_completeness(capsys, mb_batch):
    cfg, decided, _ = mb_batch
    rep = completeness_suite(cfg, decided)
    report(capsys, 4, rep.ok, f"{rep.unprovable} countermodels, {len(rep.violations)} failures")


def test_criterion_5_tau(capsys):
    cfg = FuzzConfig(mode=Logic.MB, **{**BATCH, "count": 200})
    rep = tau_suite(cfg)
    report(
        capsys, 5, rep.ok and rep.stats["model_checks"] == 200 * 25,
        f"{rep.total} sequents, {rep.stats['model_checks']} model checks, {len(rep.violations)} disagreements",
    )


def test_criterion_6_cut(capsys, mb_batch):
    F = parse_formula
    concl = parse_ns("p & q => p")
    left = Proof(concl, RuleId.AND_L, Focus((), F("p & q")),
                 (Proof(parse_ns("p, q => p"), RuleId.AXIOM_ID, Focus((), F("p"))),))
    right = Proof(parse_ns("p & q, p => p"), RuleId.AXIOM_ID, Focus((), F("p")))
    with_cut = Proof(concl, RuleId.CUT, Focus((), F("p")), (left, right))
    v = prove(concl)
    _, decided, _ = mb_batch
    cut_in_batch = sum(1 for d in decided if d.verdict.provable and d.verdict.proof.uses_cut())
    ok = (
        bool(check_proof(with_cut))
        and v.provable
        and not v.proof.uses_cut()
        and bool(check_proof(v.proof))
        and cut_in_batch == 0
    )
    report(capsys, 6, ok, f"cut proof accepted={bool(check_proof(with_cut))}, prover cut-free, batch proofs with cut={cut_in_batch}")


def _fmp(decided, mode):
    over_bound = sum(1 for d in decided if not d.bound_ok)
    too_big = 0
    for d in decided:
        if d.verdict.provable:
            continue
        cr = countermodel_of(d.verdict)
        created = len(nodes(d.verdict.saturated)) - len(nodes(d.tree))
        too_big += len(cr.model.worlds) > len(nodes(d.tree)) + created
    return over_bound, too_big


def test_criterion_7_finite_model_property(capsys, mb_batch):
    _, decided, _ = mb_batch
    over_bound, too_big = _fmp(decided, Logic.MB)
    report(capsys, 7, over_bound == 0 and too_big == 0,
           f"runs over bound B: {over_bound}, countermodels over size bound: {too_big}")


def test_criterion_8_mbplus(capsys, mbp_batch):
    cfg, decided, decide_secs = mbp_batch
    snd, secs = timed(lambda: soundness_suite(cfg, decided))
    cmp_ = completeness_suite(cfg, decided)
    tau = tau_suite(FuzzConfig(mode=Logic.MBPLUS, **{**BATCH, "count": 200}))
    over_bound, too_big = _fmp(decided, Logic.MBPLUS)
    trans = mbplus_translation_suite(FuzzConfig(mode=Logic.MB, **{**BATCH, "count": 200}))
    parts = {
        "soundness": snd.ok and decide_secs + secs < 60,
        "completeness": cmp_.ok,
        "tau": tau.ok,
        "fmp": over_bound == 0 and too_big == 0,
        "definability": trans.ok and trans.total == 200,
    }
    report(capsys, 8, all(parts.values()),
           ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in parts.items())
           + f" ({snd.provable}/{snd.total} provable, {decide_secs + secs:.1f}s)")


def test_criterion_9_mutations(capsys):
    hits = {}
    for mode in (Logic.MB, Logic.MBPLUS):
        cfg = FuzzConfig(mode=mode, **BATCH)
        hits[f"boxl_cond1/{mode.value}"] = len(soundness_suite(cfg, mutation="boxl_cond1").violations)
        hits[f"suc/{mode.value}"] = len(completeness_suite(cfg, mutation="suc").violations)
    report(capsys, 9, all(n > 0 for n in hits.values()), f"violations detected: {hits}")
