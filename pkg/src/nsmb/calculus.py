"""Rules of NSMB / NSMB+, their side conditions, proof objects and a checker.

Sequent sides are sets, so a rule instance may either drop its principal
formula in the premise (as the rules are displayed) or keep it (the context
already contained it). The checker accepts both readings; the prover always
produces the second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

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
    ParseError,
    Path,
    Sequent,
    add_child,
    check_ns,
    format_path,
    nodes,
    ns,
    parse_formula,
    parse_ns,
    parse_path,
    print_formula,
    print_ns,
    replace_at,
)


class RuleId(str, Enum):
    AXIOM_ID = "Axiom-Id"
    AXIOM_TOP = "Axiom-Top"
    AXIOM_BOT = "Axiom-Bot"
    AXIOM_BOXO1 = "Axiom-BoxO1"
    CUT = "Cut"
    WL = "WL"
    WR = "WR"
    NEG_L = "NegL"
    NEG_R = "NegR"
    AND_L = "AndL"
    AND_R = "AndR"
    BOX_L = "BoxL"
    BOX_L_SYM = "BoxLSym"
    BOX_L_SELF = "BoxLSelf"
    BOX_C0 = "BoxC0"
    BOX_R = "BoxR"
    BOX_R_SELF = "BoxRSelf"
    EQ_R_SELF = "EqRSelf"

    @property
    def is_axiom(self) -> bool:
        return self.value.startswith("Axiom")

    @property
    def arity(self) -> int:
        if self.is_axiom:
            return 0
        return 2 if self in (RuleId.CUT, RuleId.AND_R) else 1


# ---------------------------------------------------------------------------
# side conditions


def modal_precedes(a: ModalIdx, b: ModalIdx) -> bool:
    """a ⪯ b for MB indices: reverse inclusion of the threshold sets."""
    if a == b:
        return True
    if a.kind == b.kind:
        return a.value < b.value
    if a.kind is Kind.C:  # (α,c) ≺ (β,o) iff α ≤ β
        return a.value <= b.value
    return b.value > a.value  # (β,o) ≺ (α,c) iff α > β


def mbp_cond1(box: ModalIdx, bracket: ModalIdx) -> bool:
    """MB+ condition for moving a boxed body across a bracket.

    The o/o clause is read as ``α ≤ β``; with a strict inequality a box
    ``[o,a]`` could not reach a child under ``[o,a]``, although the bracket
    already guarantees a relation value above ``a``.
    """
    d, a = box.kind, box.value
    e, b = bracket.kind, bracket.value
    if d is Kind.EQ and e is Kind.EQ:
        return a == b
    if d is Kind.O and e is Kind.O:
        return a <= b
    if d is Kind.O and e is Kind.EQ:
        return a < b
    return False


def mbp_cond2(box: ModalIdx) -> bool:
    """MB+ condition for (□L self), reading the primed d of the source as d."""
    if box.kind is Kind.EQ:
        return box.value == ONE
    if box.kind is Kind.O:
        return box.value != ONE
    return False


def box_left_ok(box: ModalIdx, bracket: ModalIdx, mode: Logic) -> bool:
    if mode is Logic.MB:
        return modal_precedes(box, bracket)
    return mbp_cond1(box, bracket)


def self_ok(box: ModalIdx, mode: Logic) -> bool:
    if mode is Logic.MB:
        return not (box.kind is Kind.O and box.value == ONE)
    return mbp_cond2(box)


def is_universal(ix: ModalIdx) -> bool:
    return ix.kind is Kind.C and ix.value == ZERO


def self_right_index(mode: Logic) -> ModalIdx:
    return ModalIdx(Kind.C if mode is Logic.MB else Kind.EQ, ONE)


# ---------------------------------------------------------------------------
# axioms


def node_axiom(s: Sequent) -> tuple[RuleId, Formula] | None:
    shared = s.left & s.right
    if shared:
        return RuleId.AXIOM_ID, min(shared)
    if TOP in s.right:
        return RuleId.AXIOM_TOP, TOP
    if BOT in s.left:
        return RuleId.AXIOM_BOT, BOT
    for f in sorted(s.right):
        if isinstance(f, Box) and f.index.kind is Kind.O and f.index.value == ONE:
            return RuleId.AXIOM_BOXO1, f
    return None


def is_axiom(tree: NestedSequent, mode: Logic = Logic.MB) -> tuple[RuleId, Path, Formula] | None:
    """First node (preorder) instantiating an axiom, with the witnessing formula."""
    for path, s in nodes(tree):
        hit = node_axiom(s)
        if hit is not None:
            return hit[0], path, hit[1]
    return None


# ---------------------------------------------------------------------------
# proofs


@dataclass(frozen=True)
class Focus:
    path: Path = ()
    formula: Formula | None = None
    target: Path | None = None  # node receiving the body in BoxL / BoxLSym / BoxC0


@dataclass(frozen=True, eq=False)
class Proof:
    conclusion: NestedSequent
    rule: RuleId
    focus: Focus = field(default_factory=Focus)
    premises: tuple["Proof", ...] = ()

    def walk(self) -> Iterator["Proof"]:
        stack = [self]
        while stack:
            p = stack.pop()
            yield p
            stack.extend(reversed(p.premises))

    def rules(self) -> list[RuleId]:
        """Rules in preorder (root first)."""
        return [p.rule for p in self.walk()]

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def uses_cut(self) -> bool:
        return any(p.rule is RuleId.CUT for p in self.walk())


@dataclass
class CheckResult:
    ok: bool
    rule: RuleId | None = None
    path: Path | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "proof accepted"
        where = format_path(self.path) if self.path is not None else "?"
        return f"rejected at {self.rule.value if self.rule else '?'} (node {where}): {self.reason}"


class _Reject(Exception):
    pass


def _node(tree: NestedSequent, path: Path) -> NestedSequent:
    try:
        return tree.at(path)
    except (IndexError, TypeError):
        raise _Reject(f"no node at {format_path(path)}") from None


def _set_node(tree: NestedSequent, path: Path, left=None, right=None) -> NestedSequent:
    def fn(t: NestedSequent) -> NestedSequent:
        return t.with_node(Sequent(t.left if left is None else left, t.right if right is None else right))

    return replace_at(tree, path, fn)


def _drop_or_keep(side: frozenset, f: Formula) -> list[frozenset]:
    return [side - {f}, side]


def _require(cond: bool, reason: str):
    if not cond:
        raise _Reject(reason)


def expected_premises(p: Proof, mode: Logic) -> list[tuple[NestedSequent, ...]]:
    """All premise tuples the rule instance at ``p`` admits."""
    c, rule, fc = p.conclusion, p.rule, p.focus
    f = fc.formula
    _require(f is not None, "focus formula missing")
    n = _node(c, fc.path)
    L, R = n.left, n.right

    if rule in (RuleId.WL, RuleId.WR):
        side = L if rule is RuleId.WL else R
        _require(f in side, f"weakened formula {print_formula(f)} not present")
        if rule is RuleId.WL:
            return [(_set_node(c, fc.path, left=x),) for x in _drop_or_keep(L, f)]
        return [(_set_node(c, fc.path, right=x),) for x in _drop_or_keep(R, f)]

    if rule is RuleId.CUT:
        return [(_set_node(c, fc.path, right=R | {f}), _set_node(c, fc.path, left=L | {f}))]

    if rule is RuleId.NEG_L:
        _require(isinstance(f, Neg) and f in L, "principal formula must be a negation on the left")
        return [(_set_node(c, fc.path, left=x, right=R | {f.body}),) for x in _drop_or_keep(L, f)]

    if rule is RuleId.NEG_R:
        _require(isinstance(f, Neg) and f in R, "principal formula must be a negation on the right")
        return [(_set_node(c, fc.path, left=L | {f.body}, right=x),) for x in _drop_or_keep(R, f)]

    if rule is RuleId.AND_L:
        _require(isinstance(f, And) and f in L, "principal formula must be a conjunction on the left")
        return [(_set_node(c, fc.path, left=x | {f.lhs, f.rhs}),) for x in _drop_or_keep(L, f)]

    if rule is RuleId.AND_R:
        _require(isinstance(f, And) and f in R, "principal formula must be a conjunction on the right")
        return [
            (_set_node(c, fc.path, right=x | {f.lhs}), _set_node(c, fc.path, right=x | {f.rhs}))
            for x in _drop_or_keep(R, f)
        ]

    if rule in (RuleId.BOX_R_SELF, RuleId.EQ_R_SELF):
        want = self_right_index(mode)
        if rule is RuleId.BOX_R_SELF:
            _require(mode is Logic.MB, "BoxRSelf belongs to NSMB only")
        else:
            _require(mode is Logic.MBPLUS, "EqRSelf belongs to NSMB+ only")
        _require(isinstance(f, Box) and f.index == want and f in R, f"principal formula must be [{want}]A on the right")
        return [(_set_node(c, fc.path, right=x | {f.body}),) for x in _drop_or_keep(R, f)]

    if rule is RuleId.BOX_R:
        _require(isinstance(f, Box) and f in R, "principal formula must be a box on the right")
        _require(f.index.value != ONE, "a bracket index must differ from 1")
        return [
            (add_child(_set_node(c, fc.path, right=x), fc.path, f.index, ns((), [f.body])),)
            for x in _drop_or_keep(R, f)
        ]

    _require(isinstance(f, Box) and f in L, "principal formula must be a box on the left")

    if rule is RuleId.BOX_L_SELF:
        _require(self_ok(f.index, mode), f"self condition fails for [{f.index}]")
        return [(_set_node(c, fc.path, left=x | {f.body}),) for x in _drop_or_keep(L, f)]

    if rule in (RuleId.BOX_L, RuleId.BOX_L_SYM, RuleId.BOX_C0):
        tgt = fc.target
        _require(tgt is not None, "target node missing")
        t = _node(c, tgt)
        if rule is RuleId.BOX_L:
            _require(tgt[:-1] == fc.path and len(tgt) == len(fc.path) + 1, "target must be a child of the focus node")
            bracket = c.bracket(tgt)
        elif rule is RuleId.BOX_L_SYM:
            _require(len(fc.path) >= 1 and tgt == fc.path[:-1], "target must be the parent of the focus node")
            bracket = c.bracket(fc.path)
        else:
            _require(is_universal(f.index), "BoxC0 needs a [c,0] box")
            bracket = None
        if bracket is not None:
            _require(
                box_left_ok(f.index, bracket, mode),
                f"side condition fails: [{f.index}] against bracket [{bracket}]",
            )
        out = []
        for x in _drop_or_keep(L, f):
            tree = _set_node(c, fc.path, left=x)
            tree = _set_node(tree, tgt, left=tree.at(tgt).left | {f.body})
            out.append((tree,))
        return out

    raise _Reject(f"unknown rule {rule}")


def _check_axiom(p: Proof) -> None:
    fc = p.focus
    n = _node(p.conclusion, fc.path)
    f = fc.formula
    if p.rule is RuleId.AXIOM_ID:
        _require(f is not None and f in n.left and f in n.right, "formula must occur on both sides")
    elif p.rule is RuleId.AXIOM_TOP:
        _require(TOP in n.right, "T must occur on the right")
    elif p.rule is RuleId.AXIOM_BOT:
        _require(BOT in n.left, "F must occur on the left")
    elif p.rule is RuleId.AXIOM_BOXO1:
        _require(
            isinstance(f, Box) and f.index == ModalIdx(Kind.O, ONE) and f in n.right,
            "[o,1]A must occur on the right",
        )


def check_step(p: Proof, mode: Logic = Logic.MB) -> str | None:
    """Reason the single inference at the root of ``p`` is illegal, or None."""
    try:
        try:
            check_ns(p.conclusion, mode)
        except ParseError as exc:
            raise _Reject(f"ill-formed conclusion: {exc}") from None
        _require(len(p.premises) == p.rule.arity, f"{p.rule.value} needs {p.rule.arity} premise(s)")
        if p.rule.is_axiom:
            _check_axiom(p)
            return None
        actual = tuple(q.conclusion for q in p.premises)
        if actual not in expected_premises(p, mode):
            raise _Reject("premises do not match the rule instance")
    except _Reject as exc:
        return str(exc)
    return None


def check_proof(proof: Proof, mode: Logic = Logic.MB) -> CheckResult:
    """Check every inference, root first; the first violation is reported."""
    mode = Logic(mode)
    for p in proof.walk():
        reason = check_step(p, mode)
        if reason is not None:
            return CheckResult(False, p.rule, p.focus.path, reason)
    return CheckResult(True)


# ---------------------------------------------------------------------------
# serialization


def proof_to_dict(p: Proof) -> dict:
    focus: dict = {"path": format_path(p.focus.path)}
    if p.focus.formula is not None:
        focus["formula"] = print_formula(p.focus.formula)
    if p.focus.target is not None:
        focus["target"] = format_path(p.focus.target)
    return {
        "rule": p.rule.value,
        "conclusion": print_ns(p.conclusion),
        "focus": focus,
        "premises": [proof_to_dict(q) for q in p.premises],
    }


def proof_from_dict(d: dict, mode: Logic = Logic.MB) -> Proof:
    try:
        rule = RuleId(d["rule"])
        fd = d.get("focus", {})
        focus = Focus(
            parse_path(fd.get("path", "/")),
            parse_formula(fd["formula"], mode) if "formula" in fd else None,
            parse_path(fd["target"]) if "target" in fd else None,
        )
        return Proof(
            parse_ns(d["conclusion"], mode),
            rule,
            focus,
            tuple(proof_from_dict(q, mode) for q in d.get("premises", [])),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed proof object: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed proof object: {exc}") from None


_LATEX_RULE = {
    RuleId.CUT: "cut",
    RuleId.WL: "wL",
    RuleId.WR: "wR",
    RuleId.NEG_L: r"\neg L",
    RuleId.NEG_R: r"\neg R",
    RuleId.AND_L: r"\wedge L",
    RuleId.AND_R: r"\wedge R",
    RuleId.BOX_L: r"\Box L",
    RuleId.BOX_L_SYM: r"\Box L\,sym",
    RuleId.BOX_L_SELF: r"\Box L\,self",
    RuleId.BOX_C0: r"\Box^c_0",
    RuleId.BOX_R: r"\Box R",
    RuleId.BOX_R_SELF: r"\Box R\,self",
    RuleId.EQ_R_SELF: r"{=}R\,self",
}


def _latex_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if f == TOP:
        return r"\top"
    if f == BOT:
        return r"\bot"
    if isinstance(f, Neg):
        return r"\neg " + _latex_formula(f.body)
    if isinstance(f, And):
        return rf"({_latex_formula(f.lhs)} \wedge {_latex_formula(f.rhs)})"
    kind = "=" if f.index.kind is Kind.EQ else f.index.kind.value
    return rf"\Box^{{{kind}}}_{{{f.index.value}}} {_latex_formula(f.body)}"


def _latex_ns(tree: NestedSequent) -> str:
    left = ", ".join(_latex_formula(f) for f in sorted(tree.left))
    right = [_latex_formula(f) for f in sorted(tree.right)]
    for ix, c in tree.children:
        right.append(rf"[{_latex_ns(c)}]^{{{ix.kind.value}}}_{{{ix.value}}}")
    return rf"{left} \Rightarrow {', '.join(right)}".strip()


def proof_to_latex(p: Proof) -> str:
    """bussproofs source for the derivation."""
    lines: list[str] = []

    def emit(q: Proof):
        for sub in q.premises:
            emit(sub)
        concl = f"${_latex_ns(q.conclusion)}$"
        if q.rule.is_axiom:
            lines.append(rf"\AxiomC{{{concl}}}")
            return
        lines.append(rf"\RightLabel{{\scriptsize $({_LATEX_RULE[q.rule]})$}}")
        cmd = r"\UnaryInfC" if len(q.premises) == 1 else r"\BinaryInfC"
        lines.append(rf"{cmd}{{{concl}}}")

    emit(p)
    return "\\begin{prooftree}\n" + "\n".join(lines) + "\n\\end{prooftree}"
