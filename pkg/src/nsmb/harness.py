"""Random generators and cross-validation suites.

Each suite turns one metatheorem into an executable check against the
finite-model oracle in :mod:`nsmb.semantics`:

* soundness: provable inputs have no falsifying embedding in random models;
* completeness: every unprovable input yields a verified canonical countermodel;
* tau: a nested-sequent and its formula translation agree on provability and
  on validity in every sampled model;
* mbplus_translation: ``[c,a]A`` (a > 0) may be replaced by ``[o,a]A & [=,a]A``.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .calculus import RuleId, check_proof
from .countermodel import countermodel_of, countermodel_problems
from .prover import Provable, StepBudgetExceeded, prove, step_bound
from .semantics import (
    falsifying_embedding,
    formula_valid_in,
    model_to_dict,
    random_model,
    embedding_to_dict,
)
from .syntax import (
    BOT,
    ONE,
    TOP,
    ZERO,
    And,
    Atom,
    Box,
    Formula,
    Kind,
    Logic,
    ModalIdx,
    NestedSequent,
    Neg,
    Sequent,
    imp,
    nodes,
    ns,
    or_,
    print_formula,
    print_ns,
    tau,
)

DEFAULT_POOL = (ZERO, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), ONE)
ATOM_NAMES = "pqrstuvw"


@dataclass
class FuzzConfig:
    seed: int = 0
    count: int = 500
    max_formula_depth: int = 3
    max_tree_depth: int = 2
    atoms: int = 3
    index_pool: tuple[Fraction, ...] = DEFAULT_POOL
    mode: Logic = Logic.MB
    models: int = 25
    max_worlds: int = 4
    max_nodes: int = 6
    max_steps: int = 100_000
    positive_c: bool = False  # MB only: draw c-indices from the pool minus 0

    def __post_init__(self):
        self.mode = Logic(self.mode)
        self.index_pool = tuple(sorted(set(Fraction(x) for x in self.index_pool)))
        if ZERO not in self.index_pool or ONE not in self.index_pool:
            raise ValueError("index_pool must contain 0 and 1")
        if min(self.max_formula_depth, self.max_tree_depth, self.count) < 0:
            raise ValueError("depths and count must be non-negative")
        if not 1 <= self.atoms <= len(ATOM_NAMES):
            raise ValueError(f"atoms must be between 1 and {len(ATOM_NAMES)}")

    @property
    def atom_names(self) -> tuple[str, ...]:
        return tuple(ATOM_NAMES[: self.atoms])


# ---------------------------------------------------------------------------
# generators


def random_index(cfg: FuzzConfig, rng: random.Random, *, bracket: bool = False) -> ModalIdx:
    pool = [v for v in cfg.index_pool if not (bracket and v == ONE)]
    if cfg.mode is Logic.MB:
        kind = rng.choice((Kind.C, Kind.O))
        if kind is Kind.C and cfg.positive_c:
            pool = [v for v in pool if v > ZERO]
        return ModalIdx(kind, rng.choice(pool))
    roll = rng.random()
    if roll < 0.15:
        return ModalIdx(Kind.C, ZERO)
    if roll < 0.55:
        return ModalIdx(Kind.EQ, rng.choice([v for v in pool if v > ZERO]))
    return ModalIdx(Kind.O, rng.choice(pool))


def random_formula(cfg: FuzzConfig, rng: random.Random, depth: int | None = None) -> Formula:
    depth = cfg.max_formula_depth if depth is None else depth
    if depth <= 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.06:
            return TOP
        if roll < 0.12:
            return BOT
        return Atom(rng.choice(cfg.atom_names))
    sub = lambda: random_formula(cfg, rng, depth - 1)  # noqa: E731
    op = rng.choice(("neg", "and", "or", "imp", "box", "box", "dia"))
    if op == "neg":
        return Neg(sub())
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return or_(sub(), sub())
    if op == "imp":
        return imp(sub(), sub())
    ix = random_index(cfg, rng)
    if op == "box":
        return Box(ix, sub())
    return Neg(Box(ix, Neg(sub())))


def random_ns(cfg: FuzzConfig, rng: random.Random) -> NestedSequent:
    budget = [cfg.max_nodes]

    def side():
        return [random_formula(cfg, rng) for _ in range(rng.randint(0, 2))]

    def build(level: int) -> NestedSequent:
        budget[0] -= 1
        kids = []
        if level < cfg.max_tree_depth:
            for _ in range(rng.randint(0, 2)):
                if budget[0] <= 0:
                    break
                kids.append((random_index(cfg, rng, bracket=True), build(level + 1)))
        return ns(side(), side(), kids)

    return build(0)


def batch(cfg: FuzzConfig) -> list[NestedSequent]:
    rng = random.Random(cfg.seed)
    return [random_ns(cfg, rng) for _ in range(cfg.count)]


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    suite: str
    total: int = 0
    provable: int = 0
    unprovable: int = 0
    violations: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def text(self) -> str:
        head = (
            f"{self.suite}: {'ok' if self.ok else 'FAILED'}  total={self.total} "
            f"provable={self.provable} unprovable={self.unprovable} "
            f"violations={len(self.violations)} ({self.seconds:.1f}s)"
        )
        lines = [head]
        for k, v in sorted(self.stats.items()):
            lines.append(f"  {k}: {v}")
        for v in self.violations[:5]:
            lines.append("  ! " + json.dumps(v, default=str))
        if len(self.violations) > 5:
            lines.append(f"  ... {len(self.violations) - 5} more")
        return "\n".join(lines)


@dataclass
class Decided:
    tree: NestedSequent
    verdict: object
    bound_ok: bool


def decide_batch(cfg: FuzzConfig, trees: Sequence[NestedSequent] | None = None, mutation: str | None = None):
    """Run the prover over the batch, recording whether each run stayed within B."""
    out = []
    for t in batch(cfg) if trees is None else trees:
        v = prove(t, cfg.mode, cfg.max_steps, mutation=mutation)
        out.append(Decided(t, v, step_bound(t, cfg.mode).admits(v.max_branch)))
    return out


def _model_rng(cfg: FuzzConfig, k: int) -> random.Random:
    return random.Random(f"{cfg.seed}:{k}")


def _models(cfg: FuzzConfig, k: int):
    rng = _model_rng(cfg, k)
    for _ in range(cfg.models):
        yield random_model(rng, rng.randint(1, cfg.max_worlds), cfg.index_pool, cfg.atom_names)


def soundness_suite(cfg: FuzzConfig, decided=None, *, mutation: str | None = None) -> Report:
    """Provable inputs must be valid in every sampled model."""
    t0 = time.perf_counter()
    rep = Report("soundness")
    try:
        decided = decide_batch(cfg, mutation=mutation) if decided is None else decided
    except StepBudgetExceeded as exc:
        rep.violations.append({"kind": "budget", "detail": str(exc)})
        return rep
    cut_free = checked = in_bound = 0
    for k, d in enumerate(decided):
        rep.total += 1
        in_bound += d.bound_ok
        if not d.bound_ok:
            rep.violations.append({"kind": "step-bound", "input": print_ns(d.tree)})
        if not d.verdict.provable:
            rep.unprovable += 1
            continue
        rep.provable += 1
        proof = d.verdict.proof
        if proof.uses_cut():
            rep.violations.append({"kind": "cut", "input": print_ns(d.tree)})
        else:
            cut_free += 1
        if mutation is None:
            res = check_proof(proof, cfg.mode)
            checked += bool(res)
            if not res:
                rep.violations.append({"kind": "proof-check", "input": print_ns(d.tree), "detail": str(res)})
        for m in _models(cfg, k):
            e = falsifying_embedding(d.tree, m)
            if e is not None:
                rep.violations.append(
                    {
                        "kind": "unsound",
                        "input": print_ns(d.tree),
                        "model": model_to_dict(m),
                        "embedding": embedding_to_dict(e),
                    }
                )
                break
    rep.stats = {"cut_free": cut_free, "proofs_checked": checked, "within_bound": in_bound}
    rep.seconds = time.perf_counter() - t0
    return rep


def completeness_suite(cfg: FuzzConfig, decided=None, *, mutation: str | None = None) -> Report:
    """Every unprovable input must yield a verified canonical countermodel."""
    t0 = time.perf_counter()
    rep = Report("completeness")
    decided = decide_batch(cfg) if decided is None else decided
    max_worlds = pointer_models = 0
    for d in decided:
        rep.total += 1
        if d.verdict.provable:
            rep.provable += 1
            continue
        rep.unprovable += 1
        try:
            cr = countermodel_of(d.verdict, mutation=mutation)
        except ValueError as exc:
            rep.violations.append({"kind": "construction", "input": print_ns(d.tree), "detail": str(exc)})
            continue
        probs = countermodel_problems(d.tree, cr)
        if probs:
            rep.violations.append({"kind": "countermodel", "input": print_ns(d.tree), "problems": probs[:3]})
        n_orig = len(nodes(d.tree))
        created = len(nodes(d.verdict.saturated)) - n_orig
        if len(cr.model.worlds) > n_orig + created:
            rep.violations.append({"kind": "world-count", "input": print_ns(d.tree)})
        max_worlds = max(max_worlds, len(cr.model.worlds))
        pointer_models += bool(cr.pointers)
    rep.stats = {"max_worlds": max_worlds, "models_with_pointers": pointer_models}
    rep.seconds = time.perf_counter() - t0
    return rep


def tau_suite(cfg: FuzzConfig, decided=None) -> Report:
    """prove(ns) = prove(=> tau(ns)), and per-model agreement of validity."""
    t0 = time.perf_counter()
    rep = Report("tau")
    decided = decide_batch(cfg) if decided is None else decided
    model_checks = 0
    for k, d in enumerate(decided):
        rep.total += 1
        f = tau(d.tree)
        other = prove(ns((), [f]), cfg.mode, cfg.max_steps)
        if d.verdict.provable:
            rep.provable += 1
        else:
            rep.unprovable += 1
        if other.provable != d.verdict.provable:
            rep.violations.append(
                {"kind": "prove-disagree", "input": print_ns(d.tree), "tau": print_formula(f)}
            )
        for m in _models(cfg, k):
            model_checks += 1
            if (falsifying_embedding(d.tree, m) is None) != formula_valid_in(m, f):
                rep.violations.append(
                    {"kind": "model-disagree", "input": print_ns(d.tree), "model": model_to_dict(m)}
                )
                break
    rep.stats = {"model_checks": model_checks}
    rep.seconds = time.perf_counter() - t0
    return rep


def translate_c(f: Formula) -> Formula:
    """Rewrite every ``[c,a]A`` with a > 0 as ``[o,a]A & [=,a]A``."""
    if isinstance(f, Neg):
        return Neg(translate_c(f.body))
    if isinstance(f, And):
        return And(translate_c(f.lhs), translate_c(f.rhs))
    if isinstance(f, Box):
        body = translate_c(f.body)
        a = f.index.value
        if f.index.kind is Kind.C and a > ZERO:
            return And(Box(ModalIdx(Kind.O, a), body), Box(ModalIdx(Kind.EQ, a), body))
        return Box(f.index, body)
    return f


def mbplus_translation_suite(cfg: FuzzConfig) -> Report:
    """MB provability of F equals MB+ provability of its translation."""
    t0 = time.perf_counter()
    rep = Report("mbplus_translation")
    mb = FuzzConfig(**{**asdict(cfg), "mode": Logic.MB, "positive_c": True})
    rng = random.Random(cfg.seed)
    for _ in range(cfg.count):
        f = random_formula(mb, rng)
        g = translate_c(f)
        a = prove(ns((), [f]), Logic.MB, cfg.max_steps).provable
        b = prove(ns((), [g]), Logic.MBPLUS, cfg.max_steps).provable
        rep.total += 1
        rep.provable += a
        rep.unprovable += not a
        if a != b:
            rep.violations.append(
                {"kind": "disagree", "mb": print_formula(f), "mb+": print_formula(g), "mb_provable": a}
            )
    rep.seconds = time.perf_counter() - t0
    return rep


def run_all(cfg: FuzzConfig) -> list[Report]:
    """Soundness, completeness and tau over one shared batch; translation in MB."""
    decided = decide_batch(cfg)
    reps = [
        soundness_suite(cfg, decided),
        completeness_suite(cfg, decided),
        tau_suite(cfg, decided),
    ]
    if cfg.mode is Logic.MB:
        reps.append(mbplus_translation_suite(cfg))
    return reps
