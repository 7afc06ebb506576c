"""Canonical countermodels read off saturated open nested-sequents.

Worlds are the nodes of the saturated tree. A bracket ``[c,β]`` or ``[=,β]``
relates its endpoints by β, a bracket ``[o,β]`` by Suc(β) in the interpolated
index set, every world is 1-related to itself and all other pairs get 0.

Blocked branches (see the prover) end in nodes that still lack witnesses for
some right-side boxes. Such a branch is cut at the first created node ``x``
whose content equals that of a fully expanded ancestor ``m`` at distance three
or more. Nodes strictly below ``x`` are dropped, and ``x`` borrows ``m``'s
witnesses: for each of its boxes it is related to ``m``'s witness child by the
value of that child's bracket. Since ``x`` and ``m`` carry the same formulas,
the truth lemma carries over.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .calculus import is_axiom
from .prover import SearchState, StepInstance, Unprovable, _instances, requires_child
from .semantics import Model, check_embedding, extension, model_errors, ns_false_under
from .syntax import (
    ONE,
    ZERO,
    Atom,
    Box,
    Formula,
    Kind,
    Logic,
    ModalIdx,
    NestedSequent,
    Path,
    format_path,
    index_set,
    nodes,
)


class NotSaturatedError(ValueError):
    pass


@dataclass(frozen=True)
class InterpSet:
    base: tuple[Fraction, ...]
    full: tuple[Fraction, ...]
    suc: dict = field(hash=False, compare=False)

    def succ(self, x: Fraction) -> Fraction:
        return self.suc[Fraction(x)]


def interpolate(base: Iterable[Fraction]) -> InterpSet:
    """Insert the midpoint of every gap; Suc is the successor in the result."""
    b = tuple(sorted(set(Fraction(x) for x in base) | {ZERO, ONE}))
    full = sorted(set(b) | {(x + y) / 2 for x, y in zip(b, b[1:])})
    suc = {x: y for x, y in zip(full, full[1:])}
    suc[full[-1]] = full[-1]
    return InterpSet(b, tuple(full), suc)


def is_interpolated_set(base: Iterable[Fraction], candidate: Iterable[Fraction]) -> bool:
    """Base ⊆ candidate ⊆ [0,1] and exactly one new value inside every base gap."""
    b = sorted(set(Fraction(x) for x in base))
    cand = [Fraction(x) for x in candidate]
    if cand != sorted(set(cand)) or not set(b) <= set(cand):
        return False
    if any(x < b[0] or x > b[-1] for x in cand):
        return False
    extra = [x for x in cand if x not in set(b)]
    for lo, hi in zip(b, b[1:]):
        if sum(1 for x in extra if lo < x < hi) != 1:
            return False
    return len(extra) == len(b) - 1


@dataclass
class CanonicalResult:
    model: Model
    embedding: dict[Path, str]  # original nodes -> worlds
    world_of: dict[Path, str]  # kept saturated nodes -> worlds
    saturated: NestedSequent
    interp: InterpSet
    mode: Logic
    pointers: list[tuple[Path, Path, Fraction]] = field(default_factory=list)
    cut_points: list[Path] = field(default_factory=list)


def witness_child(tree: NestedSequent, f: Box) -> int | None:
    for i, (ix, child) in enumerate(tree.children):
        if ix == f.index and f.body in child.right:
            return i
    return None


def requirements(tree: NestedSequent, mode: Logic) -> list[Box]:
    return [f for f in sorted(tree.right) if requires_child(f, mode)]


def is_deficient(tree: NestedSequent, mode: Logic) -> bool:
    return any(witness_child(tree, f) is None for f in requirements(tree, mode))


def _check_saturated(tree: NestedSequent, mode: Logic, original_paths: frozenset) -> None:
    if is_axiom(tree, mode) is not None:
        raise NotSaturatedError("the nested-sequent is an axiom instance")
    everything = frozenset((p, f) for p, s in nodes(tree) for f in s.right)
    probe = SearchState(tree, everything, (), original_paths, False)
    inst: StepInstance | None = next(_instances(probe, mode), None)
    if inst is not None:
        raise NotSaturatedError(
            f"step {inst.step} still applies at node {format_path(inst.path)}"
        )


def _bracket_value(ix: ModalIdx, interp: InterpSet, mutation: str | None) -> Fraction:
    if ix.kind is Kind.O:
        if mutation == "suc":
            return ix.value  # off by one: the predecessor of Suc(β)
        return interp.succ(ix.value)
    return ix.value


def canonical_model(
    saturated: NestedSequent,
    mode: Logic | str = Logic.MB,
    original: NestedSequent | None = None,
    base: Iterable[Fraction] = (),
    mutation: str | None = None,
) -> CanonicalResult:
    """Build (S_C, R_C, V_C) and E_C from a saturated open nested-sequent.

    ``original`` fixes which nodes were present before saturation (defaults to
    all of them); ``base`` adds indices to J before interpolation.
    """
    mode = Logic(mode)
    original = saturated if original is None else original
    original_paths = frozenset(p for p, _ in nodes(original))
    _check_saturated(saturated, mode, original_paths)
    interp = interpolate(set(index_set(saturated)) | set(Fraction(x) for x in base))

    # top-down pass choosing kept nodes and cut points
    kept: list[Path] = []
    cuts: dict[Path, Path] = {}  # cut point -> matching ancestor
    stack: list[tuple[Path, NestedSequent, tuple]] = [((), saturated, ())]
    while stack:
        path, t, anc = stack.pop()  # anc: ancestor (path, subtree) pairs, root first
        kept.append(path)
        deficient_below = None
        if path not in original_paths:
            for mpath, m in reversed(anc[: max(len(anc) - 2, 0)]):
                if (m.left, m.right) == (t.left, t.right) and not is_deficient(m, mode):
                    if deficient_below is None:
                        deficient_below = any(is_deficient(s, mode) for s in _subtrees(t))
                    if deficient_below:
                        cuts[path] = mpath
                    break
        if path in cuts:
            continue
        if is_deficient(t, mode):
            raise NotSaturatedError(f"node {format_path(path)} lacks a witness for a right-side box")
        for i in reversed(range(len(t.children))):
            stack.append((path + (i,), t.children[i][1], anc + ((path, t),)))

    kept.sort()  # lexicographic order on paths is preorder
    world_of = {p: f"w{i}" for i, p in enumerate(kept)}
    pos = {p: i for i, p in enumerate(kept)}
    n = len(kept)
    rel = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]

    def relate(a: Path, b: Path, v: Fraction):
        i, j = pos[a], pos[b]
        rel[i][j] = rel[j][i] = v

    for p in kept:
        if p:
            parent = p[:-1]
            ix = saturated.at(parent).children[p[-1]][0]
            relate(parent, p, _bracket_value(ix, interp, mutation))

    pointers = []
    for x, m in sorted(cuts.items()):
        mt = saturated.at(m)
        for f in requirements(saturated.at(x), mode):
            i = witness_child(mt, f)
            c = m + (i,)
            v = _bracket_value(mt.children[i][0], interp, mutation)
            relate(x, c, v)
            pointers.append((x, c, v))

    val: dict[str, set[str]] = {}
    for p in kept:
        for f in saturated.at(p).left:
            if isinstance(f, Atom):
                val.setdefault(f.name, set()).add(world_of[p])
    worlds = tuple(world_of[p] for p in kept)
    model = Model(worlds, tuple(map(tuple, rel)), {a: frozenset(ws) for a, ws in val.items()})
    embedding = {p: world_of[p] for p in original_paths}
    return CanonicalResult(
        model, embedding, world_of, saturated, interp, mode, pointers, sorted(cuts)
    )


def _subtrees(t: NestedSequent):
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(c for _, c in s.children)


def countermodel_of(verdict: Unprovable, base: Iterable[Fraction] = (), mutation: str | None = None) -> CanonicalResult:
    return canonical_model(verdict.saturated, verdict.mode, verdict.original, base, mutation)


def countermodel_problems(original: NestedSequent, cr: CanonicalResult) -> list[str]:
    """Every failed check of the truth lemma and of falsity under E_C."""
    m = cr.model
    probs = list(model_errors(m))
    if probs:
        return probs
    suc_images = {cr.interp.succ(x) for x in cr.interp.base if x != ONE}
    for p, c, ix in _edges_kept(cr):
        if ix.kind is Kind.EQ and m.r(cr.world_of[p], cr.world_of[c]) in suc_images:
            probs.append(f"bracket [{ix}] at {format_path(c)} mapped to a Suc image")
    for p, w in cr.world_of.items():
        node = cr.saturated.at(p)
        for f in sorted(node.left):
            if not _holds(m, w, f):
                probs.append(f"left formula {f} is false at {w} ({format_path(p)})")
        for f in sorted(node.right):
            if _holds(m, w, f):
                probs.append(f"right formula {f} is true at {w} ({format_path(p)})")
    try:
        if not check_embedding(original, m, cr.embedding):
            probs.append("E_C violates a bracket constraint of the input")
        elif not ns_false_under(original, m, cr.embedding):
            probs.append("the input is not false under E_C")
    except KeyError as exc:
        probs.append(str(exc))
    return probs


def verify_countermodel(original: NestedSequent, cr: CanonicalResult) -> bool:
    return not countermodel_problems(original, cr)


def _holds(m: Model, w: str, f: Formula) -> bool:
    return m.pos(w) in extension(m, f)


def _edges_kept(cr: CanonicalResult):
    for p in cr.world_of:
        if p:
            yield p[:-1], p, cr.saturated.at(p[:-1]).children[p[-1]][0]
