"""Why step 8 needs blocking once a left-side [c,0] box is around.

Without blocking the search keeps creating [c,1/2] children: each new child
receives ~[c,1/2]p from the universal box, which asks for yet another child.
With blocking the branch stops at depth four and the countermodel closes it
with a back-pointer.
"""

from nsmb.countermodel import countermodel_of, verify_countermodel
from nsmb.prover import StepBudgetExceeded, prove, step_bound
from nsmb.semantics import model_to_dict
from nsmb.syntax import nodes, parse_ns, print_ns

INPUT = "[c,0]~[c,1/2]p =>"


def main():
    t = parse_ns(INPUT)
    for budget in (50, 200, 600):
        try:
            prove(t, max_steps=budget, blocking=False)
            print(f"no blocking, budget {budget}: finished")
        except StepBudgetExceeded:
            print(f"no blocking, budget {budget}: still running")
    v = prove(t)
    depth = max(len(p) for p, _ in nodes(v.saturated))
    print(f"blocking: {v.steps} steps, tree depth {depth}, bound admits: {step_bound(t).admits(v.max_branch)}")
    print("saturated:", print_ns(v.saturated))
    cr = countermodel_of(v)
    print("pointers:", cr.pointers)
    print("model:", model_to_dict(cr.model))
    print("verified:", verify_countermodel(t, cr))


if __name__ == "__main__":
    main()
