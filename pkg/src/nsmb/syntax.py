"""Formulas, nested-sequents, parsing and printing.

Formulas are immutable and hashed through a compact prefix key that is built
once at construction time. Nested-sequents keep their children in insertion
order (so node paths stay stable while a proof search grows the tree) but
compare as multisets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

Rat = Fraction
Path = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class Kind(str, Enum):
    C = "c"
    O = "o"
    EQ = "="


class Logic(str, Enum):
    MB = "mb"
    MBPLUS = "mb+"


class ParseError(ValueError):
    """Raised for malformed input; ``pos`` is a character offset when known."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class IndexRangeError(ParseError):
    pass


class ModeError(ParseError):
    pass


@dataclass(frozen=True, order=True)
class ModalIdx:
    kind: Kind
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "value", Fraction(self.value))

    def __str__(self) -> str:
        return f"{self.kind.value},{self.value}"


def idx(kind: str | Kind, value) -> ModalIdx:
    return ModalIdx(Kind(kind), Fraction(value))


# ---------------------------------------------------------------------------
# formulas


class Formula:
    key: str

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Formula) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other: "Formula"):
        return self.key < other.key

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str
    key: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", self.name)

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Top(Formula):
    key: str = field(init=False, default="T", repr=False)

    def __repr__(self):
        return "Top()"


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Formula):
    key: str = field(init=False, default="F", repr=False)

    def __repr__(self):
        return "Bot()"


@dataclass(frozen=True, eq=False, repr=False)
class Neg(Formula):
    body: Formula
    key: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", "~" + self.body.key)

    def __repr__(self):
        return f"Neg({self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    lhs: Formula
    rhs: Formula
    key: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", f"({self.lhs.key}&{self.rhs.key})")

    def __repr__(self):
        return f"And({self.lhs!r}, {self.rhs!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Box(Formula):
    index: ModalIdx
    body: Formula
    key: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", f"[{self.index}]{self.body.key}")

    def __repr__(self):
        return f"Box({self.index.kind.value!r}, {self.index.value}, {self.body!r})"


TOP = Top()
BOT = Bot()


def or_(a: Formula, b: Formula) -> Formula:
    return Neg(And(Neg(a), Neg(b)))


def imp(a: Formula, b: Formula) -> Formula:
    return or_(Neg(a), b)


def diamond(index: ModalIdx, a: Formula) -> Formula:
    return Neg(Box(index, Neg(a)))


def box(kind: str, value, body: Formula) -> Box:
    return Box(idx(kind, value), body)


def subformulas(f: Formula) -> set[Formula]:
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        if isinstance(g, (Neg, Box)):
            stack.append(g.body)
        elif isinstance(g, And):
            stack.extend((g.lhs, g.rhs))
    return out


def modal_degree(f: Formula) -> int:
    if isinstance(f, Box):
        return 1 + modal_degree(f.body)
    if isinstance(f, Neg):
        return modal_degree(f.body)
    if isinstance(f, And):
        return max(modal_degree(f.lhs), modal_degree(f.rhs))
    return 0


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def modal_indices(f: Formula) -> set[ModalIdx]:
    return {g.index for g in subformulas(f) if isinstance(g, Box)}


# ---------------------------------------------------------------------------
# nested-sequents


@dataclass(frozen=True)
class Sequent:
    left: frozenset[Formula] = frozenset()
    right: frozenset[Formula] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "left", frozenset(self.left))
        object.__setattr__(self, "right", frozenset(self.right))

    def __str__(self):
        return print_ns(NestedSequent(self))


@dataclass(frozen=True, eq=False)
class NestedSequent:
    node: Sequent
    children: tuple[tuple[ModalIdx, "NestedSequent"], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def left(self) -> frozenset[Formula]:
        return self.node.left

    @property
    def right(self) -> frozenset[Formula]:
        return self.node.right

    @property
    def key(self) -> str:
        # multiset semantics for children: the key sorts them
        k = self.__dict__.get("_key")
        if k is None:
            parts = sorted(f"[{i}]{c.key}" for i, c in self.children)
            k = "({}=>{}{{{}}})".format(
                "\x1f".join(sorted(f.key for f in self.left)),
                "\x1f".join(sorted(f.key for f in self.right)),
                "\x1e".join(parts),
            )
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, NestedSequent) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return print_ns(self)

    def at(self, path: Path) -> "NestedSequent":
        ns = self
        for i in path:
            ns = ns.children[i][1]
        return ns

    def bracket(self, path: Path) -> ModalIdx:
        """Index of the bracket enclosing the node at a non-root path."""
        return self.at(path[:-1]).children[path[-1]][0]

    def with_node(self, node: Sequent) -> "NestedSequent":
        return NestedSequent(node, self.children)


def ns(left: Iterable[Formula] = (), right: Iterable[Formula] = (), children=()) -> NestedSequent:
    return NestedSequent(Sequent(frozenset(left), frozenset(right)), tuple(children))


def replace_at(tree: NestedSequent, path: Path, fn) -> NestedSequent:
    """Rebuild ``tree`` with the subtree at ``path`` replaced by ``fn(subtree)``."""
    if not path:
        return fn(tree)
    i = path[0]
    kids = list(tree.children)
    ix, child = kids[i]
    kids[i] = (ix, replace_at(child, path[1:], fn))
    return NestedSequent(tree.node, tuple(kids))


def add_left(tree: NestedSequent, path: Path, *fs: Formula) -> NestedSequent:
    return replace_at(tree, path, lambda t: t.with_node(Sequent(t.left | set(fs), t.right)))


def add_right(tree: NestedSequent, path: Path, *fs: Formula) -> NestedSequent:
    return replace_at(tree, path, lambda t: t.with_node(Sequent(t.left, t.right | set(fs))))


def add_child(tree: NestedSequent, path: Path, index: ModalIdx, child: NestedSequent) -> NestedSequent:
    return replace_at(tree, path, lambda t: NestedSequent(t.node, t.children + ((index, child),)))


def nodes(tree: NestedSequent) -> list[tuple[Path, Sequent]]:
    """All nodes in preorder, each addressed by its child-position path."""
    out: list[tuple[Path, Sequent]] = []
    stack: list[tuple[Path, NestedSequent]] = [((), tree)]
    while stack:
        path, t = stack.pop()
        out.append((path, t.node))
        for i in range(len(t.children) - 1, -1, -1):
            stack.append((path + (i,), t.children[i][1]))
    return out


def edges(tree: NestedSequent) -> Iterator[tuple[Path, Path, ModalIdx]]:
    """(parent path, child path, bracket index) for every bracket."""
    stack: list[tuple[Path, NestedSequent]] = [((), tree)]
    while stack:
        path, t = stack.pop()
        for i, (ix, child) in enumerate(t.children):
            yield path, path + (i,), ix
            stack.append((path + (i,), child))


def ns_formulas(tree: NestedSequent) -> set[Formula]:
    out: set[Formula] = set()
    for _, s in nodes(tree):
        out |= s.left | s.right
    return out


def index_set(tree: NestedSequent) -> tuple[Fraction, ...]:
    vals = {ZERO, ONE}
    for f in ns_formulas(tree):
        vals |= {i.value for i in modal_indices(f)}
    for _, _, ix in edges(tree):
        vals.add(ix.value)
    return tuple(sorted(vals))


def conj(fs: Iterable[Formula]) -> Formula:
    fs = sorted(fs)
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = sorted(fs)
    if not fs:
        return BOT
    out = fs[0]
    for f in fs[1:]:
        out = or_(out, f)
    return out


def tau(tree: NestedSequent) -> Formula:
    """Formula interpretation: (/\\ left -> \\/ right) | [i]tau(child) | ..."""
    out = imp(conj(tree.left), disj(tree.right))
    for ix, child in tree.children:
        out = or_(out, Box(ix, tau(child)))
    return out


# ---------------------------------------------------------------------------
# mode checks


def check_index(ix: ModalIdx, mode: Logic, *, bracket: bool = False, pos: int | None = None) -> None:
    if not ZERO <= ix.value <= ONE:
        raise IndexRangeError(f"index out of range: {ix.value} not in [0,1]", pos)
    if bracket and ix.value == ONE:
        raise IndexRangeError("bracket index must be < 1", pos)
    if mode is Logic.MB:
        if ix.kind is Kind.EQ:
            raise ModeError("'=' modalities require --logic mb+", pos)
    else:
        if ix.kind is Kind.C and ix.value != ZERO:
            raise ModeError(f"mb+ admits 'c' only with value 0, got c,{ix.value}", pos)
        if ix.kind is Kind.EQ and ix.value == ZERO:
            raise ModeError("'=,0' is not part of mb+", pos)


def check_formula(f: Formula, mode: Logic) -> None:
    for ix in modal_indices(f):
        check_index(ix, mode)


def check_ns(tree: NestedSequent, mode: Logic) -> None:
    for f in ns_formulas(tree):
        check_formula(f, mode)
    for _, _, ix in edges(tree):
        check_index(ix, mode, bracket=True)


# ---------------------------------------------------------------------------
# printing

_IMP, _OR, _AND, _UN = 1, 2, 3, 4


def _or_parts(f: Formula):
    if isinstance(f, Neg) and isinstance(f.body, And):
        a, b = f.body.lhs, f.body.rhs
        if isinstance(a, Neg) and isinstance(b, Neg):
            return a.body, b.body
    return None


def _fmt(f: Formula) -> tuple[str, int]:
    parts = _or_parts(f)
    if parts is not None:
        x, y = parts
        if isinstance(x, Neg) and _or_parts(x) is None:
            return f"{_wrap(x.body, _IMP + 1)} -> {_wrap(y, _IMP)}", _IMP
        return f"{_wrap(x, _OR)} | {_wrap(y, _OR + 1)}", _OR
    if isinstance(f, Atom):
        return f.name, _UN
    if isinstance(f, Top):
        return "T", _UN
    if isinstance(f, Bot):
        return "F", _UN
    if isinstance(f, Neg):
        if isinstance(f.body, Box) and isinstance(f.body.body, Neg):
            return f"<{f.body.index}>{_wrap(f.body.body.body, _UN)}", _UN
        return f"~{_wrap(f.body, _UN)}", _UN
    if isinstance(f, And):
        return f"{_wrap(f.lhs, _AND)} & {_wrap(f.rhs, _AND + 1)}", _AND
    if isinstance(f, Box):
        return f"[{f.index}]{_wrap(f.body, _UN)}", _UN
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, min_prec: int) -> str:
    text, prec = _fmt(f)
    return text if prec >= min_prec else f"({text})"


def print_formula(f: Formula) -> str:
    return _fmt(f)[0]


def print_ns(tree: NestedSequent) -> str:
    left = ", ".join(sorted(print_formula(f) for f in tree.left))
    right = ", ".join(sorted(print_formula(f) for f in tree.right))
    text = f"{left} => {right}".strip()
    if tree.children:
        kids = ", ".join(f"[{ix}]: ( {print_ns(c)} )" for ix, c in tree.children)
        text += f" {{ {kids} }}"
    return text


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>=>|->|[~&|\[\]<>,(){}:=]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, mode: Logic):
        self.text = text
        self.mode = Logic(mode)
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == value

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)
        self.i += 1

    def formula(self) -> Formula:
        lhs = self.disjunction()
        if self.at("->"):
            self.i += 1
            return imp(lhs, self.formula())
        return lhs

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.at("|"):
            self.i += 1
            out = or_(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.at("&"):
            self.i += 1
            out = And(out, self.unary())
        return out

    def modal_index(self, close: str, *, bracket: bool = False) -> ModalIdx:
        kind, val, pos = self.peek()
        if val not in ("c", "o", "="):
            raise ParseError(f"expected modality kind c, o or =, found {val!r}", pos)
        self.i += 1
        self.expect(",")
        nkind, nval, npos = self.peek()
        if nkind != "num":
            raise ParseError(f"expected a number, found {nval!r}", npos)
        self.i += 1
        try:
            value = Fraction(nval)
        except ZeroDivisionError:
            raise ParseError("zero denominator", npos) from None
        self.expect(close)
        ix = ModalIdx(Kind(val), value)
        check_index(ix, self.mode, bracket=bracket, pos=npos)
        return ix

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "op":
            if val == "~":
                self.i += 1
                return Neg(self.unary())
            if val == "[":
                self.i += 1
                ix = self.modal_index("]")
                return Box(ix, self.unary())
            if val == "<":
                self.i += 1
                ix = self.modal_index(">")
                return diamond(ix, self.unary())
            if val == "(":
                self.i += 1
                f = self.formula()
                self.expect(")")
                return f
        if kind == "ident":
            self.i += 1
            if val == "T":
                return TOP
            if val == "F":
                return BOT
            return Atom(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def flist(self, stops: tuple[str, ...]) -> list[Formula]:
        out: list[Formula] = []
        kind, val, _ = self.peek()
        if kind == "eof" or (kind == "op" and val in stops):
            return out
        out.append(self.formula())
        while self.at(","):
            self.i += 1
            out.append(self.formula())
        return out

    def nested(self) -> NestedSequent:
        left = self.flist(("=>",))
        self.expect("=>")
        right = self.flist(("{", ")"))
        children = []
        if self.at("{"):
            self.i += 1
            while True:
                self.expect("[")
                ix = self.modal_index("]", bracket=True)
                self.expect(":")
                self.expect("(")
                children.append((ix, self.nested()))
                self.expect(")")
                if self.at(","):
                    self.i += 1
                    continue
                break
            self.expect("}")
        return ns(left, right, children)

    def done(self):
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected trailing input {val!r}", pos)


def parse_formula(text: str, mode: Logic | str = Logic.MB) -> Formula:
    p = _Parser(text, Logic(mode))
    f = p.formula()
    p.done()
    return f


def parse_ns(text: str, mode: Logic | str = Logic.MB) -> NestedSequent:
    p = _Parser(text, Logic(mode))
    tree = p.nested()
    p.done()
    return tree


def parse_input(text: str, mode: Logic | str = Logic.MB) -> NestedSequent:
    """A nested-sequent if the text contains '=>', else the sequent '=> F'."""
    if "=>" in text:
        return parse_ns(text, mode)
    return ns((), [parse_formula(text, mode)])


def format_path(path: Path) -> str:
    return "/" + "/".join(str(i) for i in path)


def parse_path(text: str) -> Path:
    text = text.strip()
    if not text.startswith("/"):
        raise ParseError(f"bad node path {text!r}")
    return tuple(int(p) for p in text[1:].split("/") if p)
