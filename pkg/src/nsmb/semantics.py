"""Finite MB-realizations and truth of formulas and nested-sequents in them.

The family P of admissible sets is taken to be the full powerset of the
worlds, so a model is just worlds, a symmetric [0,1]-valued relation and a
valuation of atoms. Atoms missing from the valuation are false everywhere.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .syntax import (
    ONE,
    ZERO,
    And,
    Atom,
    Bot,
    Box,
    Formula,
    Kind,
    NestedSequent,
    Neg,
    Path,
    Top,
    edges,
    format_path,
    nodes,
    parse_path,
)

Embedding = dict  # Path -> world id

DEFAULT_ATOMS = ("p", "q", "r")


@dataclass(frozen=True, eq=False)
class Model:
    worlds: tuple[str, ...]
    rel: tuple[tuple[Fraction, ...], ...]
    val: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "rel", tuple(tuple(Fraction(x) for x in row) for row in self.rel))
        object.__setattr__(self, "val", {a: frozenset(ws) for a, ws in self.val.items()})
        object.__setattr__(self, "_pos", {w: i for i, w in enumerate(self.worlds)})
        object.__setattr__(self, "_ext", {})

    def pos(self, w: str) -> int:
        try:
            return self._pos[w]
        except KeyError:
            raise KeyError(f"unknown world {w!r}") from None

    def r(self, s: str, t: str) -> Fraction:
        return self.rel[self.pos(s)][self.pos(t)]

    def __eq__(self, other):
        return (
            isinstance(other, Model)
            and self.worlds == other.worlds
            and self.rel == other.rel
            and self.val == other.val
        )

    __hash__ = None


def model_errors(m: Model) -> list[str]:
    """Violations of the EQL-frame conditions; empty for a valid realization."""
    errs = []
    n = len(m.worlds)
    if n == 0:
        errs.append("no worlds")
    if len(set(m.worlds)) != n:
        errs.append("duplicate world ids")
    if len(m.rel) != n or any(len(row) != n for row in m.rel):
        return errs + ["relation is not an n x n matrix"]
    for i in range(n):
        for j in range(n):
            x = m.rel[i][j]
            if not ZERO <= x <= ONE:
                errs.append(f"R({m.worlds[i]},{m.worlds[j]}) = {x} outside [0,1]")
            if x != m.rel[j][i]:
                errs.append(f"R not symmetric at ({m.worlds[i]},{m.worlds[j]})")
            if (x == ONE) != (i == j):
                errs.append(f"R({m.worlds[i]},{m.worlds[j]}) = {x} breaks R(s,t)=1 iff s=t")
    for a, ws in m.val.items():
        extra = set(ws) - set(m.worlds)
        if extra:
            errs.append(f"valuation of {a} mentions unknown worlds {sorted(extra)}")
    return errs


def is_realization(m: Model) -> bool:
    return not model_errors(m)


def _meets(kind: Kind, threshold: Fraction, x: Fraction) -> bool:
    if kind is Kind.C:
        return threshold <= x
    if kind is Kind.O:
        return threshold < x
    return threshold == x


def extension(m: Model, f: Formula) -> frozenset[int]:
    """Positions of the worlds where ``f`` holds."""
    cache = m._ext
    hit = cache.get(f)
    if hit is not None:
        return hit
    n = len(m.worlds)
    if isinstance(f, Atom):
        out = frozenset(m.pos(w) for w in m.val.get(f.name, ()))
    elif isinstance(f, Top):
        out = frozenset(range(n))
    elif isinstance(f, Bot):
        out = frozenset()
    elif isinstance(f, Neg):
        out = frozenset(range(n)) - extension(m, f.body)
    elif isinstance(f, And):
        out = extension(m, f.lhs) & extension(m, f.rhs)
    elif isinstance(f, Box):
        body = extension(m, f.body)
        kind, a = f.index.kind, f.index.value
        out = frozenset(
            s
            for s in range(n)
            if all(t in body for t in range(n) if _meets(kind, a, m.rel[s][t]))
        )
    else:
        raise TypeError(f"not a formula: {f!r}")
    cache[f] = out
    return out


def eval_formula(m: Model, w: str, f: Formula) -> bool:
    return m.pos(w) in extension(m, f)


def formula_valid_in(m: Model, f: Formula) -> bool:
    return len(extension(m, f)) == len(m.worlds)


def truth_set(m: Model, f: Formula) -> list[str]:
    ext = extension(m, f)
    return [w for i, w in enumerate(m.worlds) if i in ext]


# ---------------------------------------------------------------------------
# embeddings


def check_embedding(tree: NestedSequent, m: Model, e: Mapping[Path, str]) -> bool:
    for path, _ in nodes(tree):
        if path not in e:
            raise KeyError(f"embedding misses node {format_path(path)}")
    for parent, child, ix in edges(tree):
        if not _meets(ix.kind, ix.value, m.r(e[parent], e[child])):
            return False
    return True


def node_false_at(m: Model, w: str, left: Iterable[Formula], right: Iterable[Formula]) -> bool:
    i = m.pos(w)
    return all(i in extension(m, f) for f in left) and all(i not in extension(m, f) for f in right)


def ns_false_under(tree: NestedSequent, m: Model, e: Mapping[Path, str]) -> bool:
    if not check_embedding(tree, m, e):
        raise ValueError("not an embedding: a bracket constraint is violated")
    return all(node_false_at(m, e[path], s.left, s.right) for path, s in nodes(tree))


def falsifying_embedding(tree: NestedSequent, m: Model) -> dict[Path, str] | None:
    """Enumerate world assignments in preorder; return one making ``tree`` false.

    Branches are cut as soon as a bracket constraint or a node's falsity fails.
    """
    order = nodes(tree)
    parent_of: dict[Path, tuple[Path, object]] = {c: (p, ix) for p, c, ix in edges(tree)}
    n = len(m.worlds)
    # worlds at which each node, taken alone, is false
    cands = []
    for path, s in order:
        cands.append([w for w in range(n) if node_false_at(m, m.worlds[w], s.left, s.right)])
    assign: dict[Path, int] = {}

    def go(k: int) -> bool:
        if k == len(order):
            return True
        path = order[k][0]
        link = parent_of.get(path)
        for w in cands[k]:
            if link is not None:
                p, ix = link
                if not _meets(ix.kind, ix.value, m.rel[assign[p]][w]):
                    continue
            assign[path] = w
            if go(k + 1):
                return True
        assign.pop(path, None)
        return False

    if go(0):
        return {p: m.worlds[w] for p, w in assign.items()}
    return None


def ns_valid_in(tree: NestedSequent, m: Model) -> bool:
    return falsifying_embedding(tree, m) is None


# ---------------------------------------------------------------------------
# generation and IO


def relation_values(pool: Iterable[Fraction]) -> list[Fraction]:
    """Pool values below 1 together with midpoints of consecutive pool values."""
    vals = sorted(set(Fraction(v) for v in pool) | {ONE})
    if len(vals) < 2:
        raise ValueError("value pool must contain a value below 1")
    mids = [(a + b) / 2 for a, b in zip(vals, vals[1:])]
    return sorted(set(v for v in vals if v < ONE) | set(mids))


def random_model(
    seed,
    num_worlds: int,
    value_pool: Sequence[Fraction],
    atoms: Sequence[str] = DEFAULT_ATOMS,
) -> Model:
    if num_worlds < 1:
        raise ValueError("num_worlds must be at least 1")
    if not value_pool:
        raise ValueError("empty value pool")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    choices = relation_values(value_pool)
    worlds = tuple(f"w{i}" for i in range(num_worlds))
    rel = [[ONE if i == j else ZERO for j in range(num_worlds)] for i in range(num_worlds)]
    for i in range(num_worlds):
        for j in range(i + 1, num_worlds):
            rel[i][j] = rel[j][i] = rng.choice(choices)
    val = {a: frozenset(w for w in worlds if rng.random() < 0.5) for a in atoms}
    return Model(worlds, tuple(map(tuple, rel)), val)


def model_to_dict(m: Model) -> dict:
    return {
        "worlds": list(m.worlds),
        "rel": [[str(x) for x in row] for row in m.rel],
        "val": {a: sorted(ws, key=m.pos) for a, ws in sorted(m.val.items())},
    }


def model_from_dict(d: Mapping) -> Model:
    try:
        m = Model(
            tuple(d["worlds"]),
            tuple(tuple(Fraction(x) for x in row) for row in d["rel"]),
            {a: frozenset(ws) for a, ws in d.get("val", {}).items()},
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed model: {exc}") from None
    errs = model_errors(m)
    if errs:
        raise ValueError("invalid model: " + "; ".join(errs))
    return m


def embedding_to_dict(e: Mapping[Path, str]) -> dict[str, str]:
    return {format_path(p): w for p, w in sorted(e.items())}


def embedding_from_dict(d: Mapping[str, str]) -> dict[Path, str]:
    return {parse_path(k): w for k, w in d.items()}


def load_model(path) -> tuple[Model, dict[Path, str] | None]:
    with open(path) as fh:
        d = json.load(fh)
    e = embedding_from_dict(d["embedding"]) if "embedding" in d else None
    return model_from_dict(d), e


def model_to_dot(m: Model, name: str = "model") -> str:
    lines = [f"graph {name} {{"]
    for i, w in enumerate(m.worlds):
        true_atoms = sorted(a for a, ws in m.val.items() if w in ws)
        label = w + ("\\n" + ",".join(true_atoms) if true_atoms else "")
        lines.append(f'  {w} [label="{label}"];')
    n = len(m.worlds)
    for i in range(n):
        for j in range(i + 1, n):
            x = m.rel[i][j]
            if x != ZERO:
                lines.append(f'  {m.worlds[i]} -- {m.worlds[j]} [label="{x}"];')
    lines.append("}")
    return "\n".join(lines)
