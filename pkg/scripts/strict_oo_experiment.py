"""Compare the two readings of the MB+ o/o side condition.

Moving [o,a]A into a child under an [o,b] bracket is allowed for a <= b here.
With the strict a < b reading some saturated sequents have no countermodel:
the canonical model refutes the truth lemma, and e.g.
"[o,1/4]p => { [o,1/4]: ( => p ) }", which is valid, stays unprovable.
"""

import nsmb.prover as prover
from nsmb.harness import DEFAULT_POOL, FuzzConfig, completeness_suite, decide_batch, soundness_suite
from nsmb.semantics import ns_valid_in, random_model
from nsmb.syntax import Kind, Logic, parse_ns

EXAMPLE = "[o,1/4]p => { [o,1/4]: ( => p ) }"


def strict(box, bracket, mode, _orig=prover.box_left_ok):
    if mode is Logic.MBPLUS and box.kind is Kind.O and bracket.kind is Kind.O:
        return box.value < bracket.value
    return _orig(box, bracket, mode)


def run(label):
    t = parse_ns(EXAMPLE, Logic.MBPLUS)
    valid = all(ns_valid_in(t, random_model(s, 3, DEFAULT_POOL)) for s in range(200))
    print(f"{label}: example provable={prover.prove(t, Logic.MBPLUS).provable} (valid in 200 models: {valid})")
    cfg = FuzzConfig(mode=Logic.MBPLUS, count=500)
    d = decide_batch(cfg)
    print(" ", soundness_suite(cfg, d).text().splitlines()[0])
    print(" ", completeness_suite(cfg, d).text().splitlines()[0])


def main():
    run("non-strict (default)")
    original = prover.box_left_ok
    prover.box_left_ok = strict
    try:
        run("strict")
    finally:
        prover.box_left_ok = original


if __name__ == "__main__":
    main()
