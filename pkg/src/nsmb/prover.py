"""Backward proof search by saturation.

Steps are tried in the fixed priority order 1,3,4,7,9,10,5,6,8,2, each only
when it would change the current nested-sequent. Principal formulas are kept,
so every branch grows monotonically and the final open branch is saturated.

When a left-side ``[c,0]`` box is present, step 10 can copy formulas of full
modal degree into freshly created nodes and the tree could grow forever. Step
8 is therefore postponed at *blocked* nodes: a node is blocked when it, or a
created ancestor of it, has exactly the same content as some ancestor at
distance three or more. The countermodel module closes such branches with
back-pointers to the matching ancestor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from .calculus import (
    Focus,
    Proof,
    RuleId,
    box_left_ok,
    expected_premises,
    is_axiom,
    is_universal,
    self_ok,
    self_right_index,
)
from .syntax import (
    ONE,
    And,
    Box,
    Formula,
    Logic,
    NestedSequent,
    Neg,
    Path,
    Sequent,
    add_child,
    check_ns,
    format_path,
    modal_degree,
    nodes,
    ns,
    ns_formulas,
    print_formula,
    replace_at,
    subformulas,
)

PRIORITY = (1, 3, 4, 7, 9, 10, 5, 6, 8, 2)

_RULE_OF_STEP = {
    1: RuleId.AND_L,
    2: RuleId.AND_R,
    3: RuleId.NEG_L,
    4: RuleId.NEG_R,
    5: RuleId.BOX_L,
    6: RuleId.BOX_L_SYM,
    7: RuleId.BOX_L_SELF,
    8: RuleId.BOX_R,
    10: RuleId.BOX_C0,
}


def rule_of_step(step: int, mode: Logic) -> RuleId:
    if step == 9:
        return RuleId.BOX_R_SELF if mode is Logic.MB else RuleId.EQ_R_SELF
    return _RULE_OF_STEP[step]


class StepBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class StepInstance:
    step: int
    rule: RuleId
    path: Path
    formula: Formula
    target: Path | None = None

    @property
    def focus(self) -> Focus:
        return Focus(self.path, self.formula, self.target)

    def to_dict(self) -> dict:
        d = {"step": self.step, "path": format_path(self.path), "formula": print_formula(self.formula)}
        if self.target is not None:
            d["target"] = format_path(self.target)
        return d


@dataclass(frozen=True)
class SearchState:
    current: NestedSequent
    expanded_boxR: frozenset = frozenset()  # (path, formula) pairs given their step-8 child
    trace: tuple[StepInstance, ...] = ()
    original_paths: frozenset = frozenset()
    blocking: bool = False

    @classmethod
    def start(cls, tree: NestedSequent) -> "SearchState":
        return cls(
            tree,
            original_paths=frozenset(p for p, _ in nodes(tree)),
            blocking=needs_blocking(tree),
        )


def needs_blocking(tree: NestedSequent) -> bool:
    """Blocking is only needed when some ``[c,0]`` box can sit on a left side."""
    subs = set()
    for f in ns_formulas(tree):
        subs |= subformulas(f)
    return any(isinstance(f, Box) and is_universal(f.index) for f in subs)


def content(t: NestedSequent) -> tuple[frozenset, frozenset]:
    return t.left, t.right


def is_blocked(tree: NestedSequent, path: Path, original_paths) -> bool:
    chain = [tree.at(path[:i]) for i in range(len(path) + 1)]
    contents = [content(t) for t in chain]
    for x in range(len(chain)):
        if path[:x] in original_paths:
            continue
        for m in range(x - 2):
            if contents[m] == contents[x]:
                return True
    return False


def _add_left(tree: NestedSequent, path: Path, f: Formula) -> NestedSequent:
    return replace_at(tree, path, lambda t: t.with_node(Sequent(t.left | {f}, t.right)))


def _add_right(tree: NestedSequent, path: Path, f: Formula) -> NestedSequent:
    return replace_at(tree, path, lambda t: t.with_node(Sequent(t.left, t.right | {f})))


def requires_child(f: Formula, mode: Logic) -> bool:
    """Right-side boxes whose falsity needs a fresh neighbour (step 8)."""
    return isinstance(f, Box) and f.index.value != ONE


def _instances(state: SearchState, mode: Logic, mutation: str | None = None) -> Iterator[StepInstance]:
    tree = state.current
    order = nodes(tree)
    subtrees = {p: tree.at(p) for p, _ in order}

    def sorted_side(side):
        return sorted(side)

    for step in PRIORITY:
        rule = rule_of_step(step, mode)
        for path, s in order:
            L, R = s.left, s.right
            if step == 1:
                for f in sorted_side(L):
                    if isinstance(f, And) and not (f.lhs in L and f.rhs in L):
                        yield StepInstance(step, rule, path, f)
            elif step == 3:
                for f in sorted_side(L):
                    if isinstance(f, Neg) and f.body not in R:
                        yield StepInstance(step, rule, path, f)
            elif step == 4:
                for f in sorted_side(R):
                    if isinstance(f, Neg) and f.body not in L:
                        yield StepInstance(step, rule, path, f)
            elif step == 7:
                for f in sorted_side(L):
                    if isinstance(f, Box) and self_ok(f.index, mode) and f.body not in L:
                        yield StepInstance(step, rule, path, f)
            elif step == 9:
                want = self_right_index(mode)
                for f in sorted_side(R):
                    if isinstance(f, Box) and f.index == want and f.body not in R:
                        yield StepInstance(step, rule, path, f)
            elif step == 10:
                for f in sorted_side(L):
                    if isinstance(f, Box) and is_universal(f.index):
                        for tpath, ts in order:
                            if f.body not in ts.left:
                                yield StepInstance(step, rule, path, f, tpath)
            elif step == 5:
                kids = subtrees[path].children
                for f in sorted_side(L):
                    if not isinstance(f, Box):
                        continue
                    for i, (ix, child) in enumerate(kids):
                        ok = mutation == "boxl_cond1" or box_left_ok(f.index, ix, mode)
                        if ok and f.body not in child.left:
                            yield StepInstance(step, rule, path, f, path + (i,))
            elif step == 6:
                if not path:
                    continue
                parent = subtrees[path[:-1]]
                ix = parent.children[path[-1]][0]
                for f in sorted_side(L):
                    if isinstance(f, Box) and box_left_ok(f.index, ix, mode) and f.body not in parent.left:
                        yield StepInstance(step, rule, path, f, path[:-1])
            elif step == 8:
                cands = [
                    f
                    for f in sorted_side(R)
                    if requires_child(f, mode) and (path, f) not in state.expanded_boxR
                ]
                if cands and not (state.blocking and is_blocked(tree, path, state.original_paths)):
                    for f in cands:
                        yield StepInstance(step, rule, path, f)
            elif step == 2:
                for f in sorted_side(R):
                    if isinstance(f, And) and f.lhs not in R and f.rhs not in R:
                        yield StepInstance(step, rule, path, f)


def saturation_steps(state: SearchState, mode: Logic = Logic.MB) -> list[StepInstance]:
    """Every applicable step instance, in priority order."""
    return list(_instances(state, Logic(mode)))


def apply_step(state: SearchState, inst: StepInstance) -> list[SearchState]:
    """Successor states; two for step 2, one otherwise."""
    t, p, f = state.current, inst.path, inst.formula
    trace = state.trace + (inst,)
    exp = state.expanded_boxR

    def nxt(tree, expanded=exp):
        return SearchState(tree, expanded, trace, state.original_paths, state.blocking)

    k = inst.step
    if k == 1:
        return [nxt(_add_left(_add_left(t, p, f.lhs), p, f.rhs))]
    if k == 2:
        return [nxt(_add_right(t, p, f.lhs)), nxt(_add_right(t, p, f.rhs))]
    if k == 3:
        return [nxt(_add_right(t, p, f.body))]
    if k == 4:
        return [nxt(_add_left(t, p, f.body))]
    if k == 7:
        return [nxt(_add_left(t, p, f.body))]
    if k == 9:
        return [nxt(_add_right(t, p, f.body))]
    if k in (5, 6, 10):
        return [nxt(_add_left(t, inst.target, f.body))]
    if k == 8:
        return [nxt(add_child(t, p, f.index, ns((), [f.body])), exp | {(p, f)})]
    raise ValueError(f"unknown step {k}")


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    original: NestedSequent
    mode: Logic
    steps: int = 0  # steps applied over all branches
    max_branch: int = 0  # longest single branch

    @property
    def provable(self) -> bool:
        return isinstance(self, Provable)


@dataclass
class Provable(Verdict):
    proof: Proof | None = None  # relevance-pruned
    raw_proof: Proof | None = field(default=None, repr=False)  # search steps, minus skipped branches


@dataclass
class Unprovable(Verdict):
    saturated: NestedSequent | None = None
    trace: tuple[StepInstance, ...] = ()
    state: SearchState | None = field(default=None, repr=False)

    def trace_json(self) -> list[dict]:
        return [s.to_dict() for s in self.trace]


@dataclass
class _Join:
    chain: list
    conclusion: NestedSequent
    focus: Focus
    right: SearchState
    left: Proof | None = None


def _fold(chain, p: Proof) -> Proof:
    for concl, rule, focus in reversed(chain):
        p = Proof(concl, rule, focus, (p,))
    return p


def prove(
    tree: NestedSequent,
    mode: Logic | str = Logic.MB,
    max_steps: int = 100_000,
    *,
    mutation: str | None = None,
    on_step: Callable[[SearchState, StepInstance, list[SearchState]], None] | None = None,
    blocking: bool | None = None,
) -> Provable | Unprovable:
    """Decide ``tree``; on success rebuild a cut-free proof from the search.

    ``mutation`` deliberately breaks a rule (used by the mutation controls);
    ``on_step`` observes every transition; ``blocking`` overrides the automatic
    choice (turning it off can make the search run forever).
    """
    mode = Logic(mode)
    check_ns(tree, mode)
    cur = SearchState.start(tree)
    if blocking is not None:
        cur = replace(cur, blocking=blocking)
    stack: list[_Join] = []
    chain: list = []
    total = longest = 0
    while True:
        ax = is_axiom(cur.current, mode)
        if ax is not None:
            rule, path, f = ax
            p = Proof(cur.current, rule, Focus(path, f))
            while True:
                p = _fold(chain, p)
                if not stack:
                    # a mutated search may break side conditions; its raw proof is kept as is
                    pruned = p if mutation else prune_proof(p, mode)
                    return Provable(tree, mode, total, longest, proof=pruned, raw_proof=p)
                j = stack[-1]
                if j.left is None:
                    lhs = (j.focus.path, "R", j.focus.formula.lhs)
                    if not mutation and lhs not in _mark(p)[1]:
                        # the left conjunct was never used: its proof already
                        # closes the conclusion, so the right branch is skipped
                        stack.pop()
                        p = prune_proof(p, mode, onto=j.conclusion)
                        chain = j.chain
                        continue
                    j.left = p
                    chain = []
                    cur = j.right
                    break
                stack.pop()
                p = Proof(j.conclusion, RuleId.AND_R, j.focus, (j.left, p))
                chain = j.chain
            continue
        inst = next(_instances(cur, mode, mutation), None)
        if inst is None:
            return Unprovable(
                tree, mode, total, longest, saturated=cur.current, trace=cur.trace, state=cur
            )
        total += 1
        if total > max_steps:
            raise StepBudgetExceeded(f"step budget of {max_steps} exhausted")
        succ = apply_step(cur, inst)
        if on_step is not None:
            on_step(cur, inst, succ)
        if inst.step == 2:
            stack.append(_Join(chain, cur.current, inst.focus, succ[1]))
            chain = []
        else:
            chain.append((cur.current, inst.rule, inst.focus))
        cur = succ[0]
        longest = max(longest, len(cur.trace))



# ---------------------------------------------------------------------------
# relevance pruning
#
# Search keeps every applicable step, so a closed branch usually contains
# steps whose additions the axiom never uses. Needs flow bottom-up as
# occurrences (path, side, formula) plus ("node", path) for structure; a step
# survives only if it supplies a need. The survivors are replayed top-down with
# child indices renumbered, since dropping a step-8 child shifts its siblings.


def _supplies(p: Proof) -> set:
    """Occurrences added by the (kept-principal) rule instance at ``p``."""
    (prem,) = p.premises
    f, path = p.focus.formula, p.focus.path
    r = p.rule
    if r is RuleId.BOX_R:
        c = path + (len(p.conclusion.at(path).children),)
        return {("node", c), (c, "R", f.body)}
    if r is RuleId.AND_L:
        return {(path, "L", f.lhs), (path, "L", f.rhs)}
    if r is RuleId.NEG_L:
        return {(path, "R", f.body)}
    if r in (RuleId.NEG_R, RuleId.BOX_L_SELF):
        return {(path, "L", f.body)}
    if r in (RuleId.BOX_R_SELF, RuleId.EQ_R_SELF):
        return {(path, "R", f.body)}
    return {(p.focus.target, "L", f.body)}  # BoxL, BoxLSym, BoxC0


def _principal(p: Proof) -> set:
    side = "L" if p.rule in (
        RuleId.AND_L, RuleId.NEG_L, RuleId.BOX_L, RuleId.BOX_L_SYM, RuleId.BOX_L_SELF, RuleId.BOX_C0
    ) else "R"
    out = {(p.focus.path, side, p.focus.formula), ("node", p.focus.path)}
    if p.focus.target is not None:
        out.add(("node", p.focus.target))
    return out


def _axiom_needs(p: Proof) -> set:
    path, f = p.focus.path, p.focus.formula
    if p.rule is RuleId.AXIOM_ID:
        return {(path, "L", f), (path, "R", f), ("node", path)}
    if p.rule is RuleId.AXIOM_BOT:
        return {(path, "L", f), ("node", path)}
    return {(path, "R", f), ("node", path)}


def _under(occ, c: Path) -> bool:
    path = occ[1] if occ[0] == "node" else occ[0]
    return path[: len(c)] == c


def _mark(proof: Proof) -> tuple[dict, set]:
    """Decide which inferences survive; returns (decisions, needs at root)."""
    decisions: dict[int, object] = {}
    # post-order without recursion
    order, stack = [], [proof]
    while stack:
        p = stack.pop()
        order.append(p)
        stack.extend(p.premises)
    needs: dict[int, set] = {}
    for p in reversed(order):
        if p.rule.is_axiom:
            needs[id(p)] = _axiom_needs(p)
        elif p.rule is RuleId.AND_R:
            left, right = p.premises
            f, path = p.focus.formula, p.focus.path
            nl, nr = needs[id(left)], needs[id(right)]
            if (path, "R", f.lhs) not in nl:
                decisions[id(p)] = 0
                needs[id(p)] = nl
            elif (path, "R", f.rhs) not in nr:
                decisions[id(p)] = 1
                needs[id(p)] = nr
            else:
                decisions[id(p)] = "keep"
                needs[id(p)] = (nl - {(path, "R", f.lhs)}) | (nr - {(path, "R", f.rhs)}) | _principal(p)
        else:
            above = needs[id(p.premises[0])]
            sup = _supplies(p)
            if p.rule is RuleId.BOX_R:
                c = next(iter(o for o in sup if o[0] == "node"))[1]
                used = any(_under(o, c) for o in above)
                rest = {o for o in above if not _under(o, c)}
            else:
                used = bool(sup & above)
                rest = above - sup
            decisions[id(p)] = "keep" if used else "drop"
            needs[id(p)] = (rest | _principal(p)) if used else above
    return decisions, needs[id(proof)]


def _remap(path: Path, mapping: dict) -> Path:
    for k in range(len(path), -1, -1):
        if path[:k] in mapping:
            return mapping[path[:k]] + path[k:]
    return path


def prune_proof(proof: Proof, mode: Logic | str = Logic.MB, onto: NestedSequent | None = None) -> Proof:
    """Drop inferences the closing axioms never use and replay the rest.

    ``onto`` replays over a different endsequent, which must contain every
    occurrence the surviving inferences need.
    """
    mode = Logic(mode)
    decisions, _ = _mark(proof)

    def replay(p: Proof, tree: NestedSequent, mapping: dict) -> Proof:
        chain = []
        while True:
            if p.rule.is_axiom:
                fc = p.focus
                leaf = Proof(tree, p.rule, Focus(_remap(fc.path, mapping), fc.formula))
                return _fold(chain, leaf)
            d = decisions[id(p)]
            if p.rule is RuleId.AND_R and d != "keep":
                p = p.premises[d]
                continue
            if d == "drop":
                p = p.premises[0]
                continue
            fc = p.focus
            focus = Focus(
                _remap(fc.path, mapping),
                fc.formula,
                None if fc.target is None else _remap(fc.target, mapping),
            )
            q = Proof(tree, p.rule, focus, ())
            prems = expected_premises(q, mode)[-1]  # the kept-principal reading
            if p.rule is RuleId.AND_R:
                subs = tuple(replay(sub, t, dict(mapping)) for sub, t in zip(p.premises, prems))
                return _fold(chain, Proof(tree, p.rule, focus, subs))
            if p.rule is RuleId.BOX_R:
                old_c = fc.path + (len(p.conclusion.at(fc.path).children),)
                mapping = dict(mapping)
                mapping[old_c] = focus.path + (len(tree.at(focus.path).children),)
            chain.append((tree, p.rule, focus))
            tree = prems[0]
            p = p.premises[0]

    return replay(proof, proof.conclusion if onto is None else onto, {})


# ---------------------------------------------------------------------------
# termination bound


@dataclass(frozen=True)
class StepBound:
    """Upper bound B on the steps of one branch; ``exact`` is None when huge."""

    exact: int | None
    log2: float
    created_depth: int | None

    def admits(self, n: int) -> bool:
        if self.exact is not None:
            return n <= self.exact
        return n <= 1 or math.log2(n) <= self.log2


_EXACT_LIMIT = 4096  # bits


def step_bound(tree: NestedSequent, mode: Logic | str = Logic.MB) -> StepBound:
    """B = N_max * (2|Sub| + b).

    Every step adds a subformula to one side of a node or creates one child per
    (node, right box) pair, so a node absorbs at most 2|Sub| + b steps, where b
    counts the boxes in Sub. Created nodes below an original node form a b-ary
    tree of bounded depth H: the maximal modal degree without left ``[c,0]``
    boxes, otherwise 3 * 4^|Sub| + 1 (blocking forbids equal contents at
    distance three or more along a branch at creation time).
    """
    subs: set[Formula] = set()
    for f in ns_formulas(tree):
        subs |= subformulas(f)
    size = len(subs)
    b = sum(1 for f in subs if isinstance(f, Box))
    orig = len(nodes(tree))
    per_node = 2 * size + b
    if needs_blocking(tree):
        log_h = math.log2(3) + 2 * size  # log2 of 3 * 4^size, the +1 is absorbed below
        if 2 * size + 2 <= 64:
            H: int | None = 3 * 4**size + 1
        else:
            H = None
    else:
        H = max((modal_degree(f) for f in subs), default=0)
        log_h = math.log2(H) if H else 0.0
    # log2 of sum_{h<=H} b^h, bounded by log2((H+1) * max(b,1)^H)
    hb = 2.0 ** log_h if log_h < 1000 else float("inf")
    log_sum = math.log2(hb + 1) + (hb * math.log2(b) if b > 1 else 0.0)
    log_total = math.log2(orig) + log_sum + math.log2(max(per_node, 1))
    if H is not None and (b <= 1 or H * math.log2(b) < _EXACT_LIMIT):
        geo = H + 1 if b <= 1 else (b ** (H + 1) - 1) // (b - 1)
        exact = orig * geo * per_node
        return StepBound(exact, math.log2(max(exact, 1)), H)
    return StepBound(None, log_total, H)


def provable(f: Formula, mode: Logic | str = Logic.MB, max_steps: int = 100_000) -> bool:
    return prove(ns((), [f]), mode, max_steps).provable
