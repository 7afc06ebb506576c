"""Nested-sequent decision procedure for the graded modal logics MB and MB+."""

from .calculus import Proof, RuleId, check_proof, is_axiom, modal_precedes
from .countermodel import canonical_model, countermodel_of, interpolate, verify_countermodel
from .prover import Provable, Unprovable, prove, provable, step_bound
from .semantics import Model, eval_formula, formula_valid_in, ns_valid_in, random_model
from .syntax import Logic, parse_formula, parse_input, parse_ns, print_formula, print_ns, tau

__all__ = [
    "Logic",
    "Model",
    "Proof",
    "Provable",
    "RuleId",
    "Unprovable",
    "canonical_model",
    "check_proof",
    "countermodel_of",
    "eval_formula",
    "formula_valid_in",
    "interpolate",
    "is_axiom",
    "modal_precedes",
    "ns_valid_in",
    "parse_formula",
    "parse_input",
    "parse_ns",
    "print_formula",
    "print_ns",
    "provable",
    "prove",
    "random_model",
    "step_bound",
    "tau",
    "verify_countermodel",
]
