"""Command-line front end: ``nsmb prove|countermodel|check|tau|eval|fuzz``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .calculus import check_proof, proof_from_dict, proof_to_dict, proof_to_latex
from .countermodel import countermodel_of, countermodel_problems
from .harness import FuzzConfig, run_all
from .prover import StepBudgetExceeded, prove
from .semantics import (
    embedding_to_dict,
    eval_formula,
    falsifying_embedding,
    formula_valid_in,
    load_model,
    model_to_dict,
    model_to_dot,
    ns_false_under,
    truth_set,
)
from .syntax import (
    Logic,
    ParseError,
    parse_formula,
    parse_input,
    print_formula,
    print_ns,
    tau,
)

EXIT_OK, EXIT_NO, EXIT_ERR = 0, 1, 2


def _read_input(arg: str) -> str:
    """Inline text, ``-`` for stdin, or ``@file``."""
    if arg == "-":
        return sys.stdin.read()
    if arg.startswith("@"):
        return Path(arg[1:]).read_text()
    return arg


def _indices(text: str | None) -> list[Fraction]:
    if not text:
        return []
    try:
        vals = [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad --indices list: {text!r}") from None
    if any(not 0 <= v <= 1 for v in vals):
        raise ParseError("--indices values must lie in [0,1]")
    return vals


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def cmd_prove(args) -> int:
    tree = parse_input(_read_input(args.input), args.logic)
    v = prove(tree, args.logic, args.max_steps)
    if args.format == "json":
        if v.provable:
            out = {"verdict": "provable", "steps": v.steps, "proof": proof_to_dict(v.proof)}
        else:
            out = {
                "verdict": "unprovable",
                "steps": v.steps,
                "saturated": print_ns(v.saturated),
                "trace": v.trace_json(),
            }
        _emit(args, json.dumps(out, indent=2))
    elif args.format == "latex" and v.provable:
        _emit(args, proof_to_latex(v.proof))
    elif v.provable:
        rules = " ".join(r.value for r in v.proof.rules())
        _emit(args, f"provable ({v.steps} search steps)\nrules: {rules}")
    else:
        _emit(args, f"unprovable ({v.steps} search steps)\nsaturated: {print_ns(v.saturated)}")
    return EXIT_OK if v.provable else EXIT_NO


def cmd_countermodel(args) -> int:
    tree = parse_input(_read_input(args.input), args.logic)
    v = prove(tree, args.logic, args.max_steps)
    if v.provable:
        print("input is provable; no countermodel exists")
        return EXIT_OK
    cr = countermodel_of(v, base=_indices(args.indices))
    probs = countermodel_problems(tree, cr)
    if probs:
        print("countermodel failed verification:", file=sys.stderr)
        for p in probs:
            print("  " + p, file=sys.stderr)
        return EXIT_ERR
    if args.format == "dot":
        _emit(args, model_to_dot(cr.model))
    else:
        d = model_to_dict(cr.model)
        d["embedding"] = embedding_to_dict(cr.embedding)
        _emit(args, json.dumps(d, indent=2))
    return EXIT_OK


def cmd_check(args) -> int:
    data = json.loads(Path(args.proof).read_text())
    proof = proof_from_dict(data.get("proof", data), args.logic)
    res = check_proof(proof, args.logic)
    print(str(res))
    return EXIT_OK if res else EXIT_NO


def cmd_tau(args) -> int:
    tree = parse_input(_read_input(args.input), args.logic)
    _emit(args, print_formula(tau(tree)))
    return EXIT_OK


def cmd_eval(args) -> int:
    """Evaluate a formula (at --world or everywhere) or a nested-sequent in a model file."""
    model, emb = load_model(args.model)
    text = _read_input(args.input)
    if "=>" in text:
        tree = parse_input(text, args.logic)
        if emb is not None:
            false = ns_false_under(tree, model, emb)
            e = emb if false else None
        else:
            e = falsifying_embedding(tree, model)
        if e is None:
            print("true (no falsifying embedding)" if emb is None else "not false under the given embedding")
            return EXIT_OK
        print("false under " + json.dumps(embedding_to_dict(e)))
        return EXIT_NO
    f = parse_formula(text, args.logic)
    if args.world:
        ok = eval_formula(model, args.world, f)
    else:
        ok = formula_valid_in(model, f)
    print("true" if ok else "false")
    if not args.world:
        print("holds at: " + ", ".join(truth_set(model, f)))
    return EXIT_OK if ok else EXIT_NO


def cmd_fuzz(args) -> int:
    cfg = FuzzConfig(
        seed=args.seed,
        count=args.count,
        max_formula_depth=args.depth,
        max_tree_depth=args.tree_depth,
        mode=args.logic,
        models=args.models,
        max_worlds=args.worlds,
        max_steps=args.max_steps,
        **({"index_pool": tuple(_indices(args.indices))} if args.indices else {}),
    )
    reps = run_all(cfg)
    if args.format == "json":
        _emit(args, json.dumps([r.to_dict() for r in reps], indent=2, default=str))
    else:
        _emit(args, "\n".join(r.text() for r in reps))
    return EXIT_OK if all(r.ok for r in reps) else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nsmb", description="Nested-sequent prover for MB and MB+.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--logic", choices=[m.value for m in Logic], default="mb")
    common.add_argument("--format", choices=["text", "json", "dot", "latex"], default="text")
    common.add_argument("--max-steps", type=int, default=100_000)
    common.add_argument("--indices", help="comma-separated extra indices (J is inferred otherwise)")
    common.add_argument("-o", "--output", help="write the result to a file")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("prove", parents=[common], help="decide a nested-sequent or formula")
    p.add_argument("input", help="text, '-' for stdin or @file")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("countermodel", parents=[common], help="emit a verified canonical countermodel")
    p.add_argument("input")
    p.set_defaults(fn=cmd_countermodel)

    p = sub.add_parser("check", parents=[common], help="check a proof JSON file")
    p.add_argument("proof")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("tau", parents=[common], help="formula interpretation of a nested-sequent")
    p.add_argument("input")
    p.set_defaults(fn=cmd_tau)

    p = sub.add_parser("eval", parents=[common], help="evaluate in a model JSON file")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--world", help="evaluate a formula at this world only")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("fuzz", parents=[common], help="run the cross-validation suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--tree-depth", type=int, default=2)
    p.add_argument("--models", type=int, default=25)
    p.add_argument("--worlds", type=int, default=4)
    p.set_defaults(fn=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    args = build_parser().parse_args(argv)
    try:
        _indices(args.indices)
        return args.fn(args)
    except (ParseError, ValueError, KeyError, OSError, StepBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERR


if __name__ == "__main__":
    sys.exit(main())
