from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from nsmb.syntax import BOT, TOP, And, Atom, Box, Kind, Logic, ModalIdx, Neg, ns

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

POOL = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def indices(mode=Logic.MB, bracket=False):
    vals = [v for v in POOL if not (bracket and v == 1)]
    if mode is Logic.MB:
        return st.builds(ModalIdx, st.sampled_from([Kind.C, Kind.O]), st.sampled_from(vals))
    return st.one_of(
        st.just(ModalIdx(Kind.C, Fraction(0))),
        st.builds(ModalIdx, st.just(Kind.O), st.sampled_from(vals)),
        st.builds(ModalIdx, st.just(Kind.EQ), st.sampled_from([v for v in vals if v > 0])),
    )


def formulas(mode=Logic.MB, max_leaves=8):
    leaves = st.one_of(st.sampled_from([Atom("p"), Atom("q"), Atom("r")]), st.just(TOP), st.just(BOT))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Neg, sub),
            st.builds(And, sub, sub),
            st.builds(Box, indices(mode), sub),
        ),
        max_leaves=max_leaves,
    )


def trees(mode=Logic.MB, depth=2, max_leaves=4):
    side = st.lists(formulas(mode, max_leaves), max_size=2)
    if depth == 0:
        return st.builds(ns, side, side)
    kid = st.tuples(indices(mode, bracket=True), trees(mode, depth - 1, max_leaves))
    return st.builds(ns, side, side, st.lists(kid, max_size=2))


@pytest.fixture
def two_world():
    """S = {s,t}, R(s,t) = 3/5, p true only at s."""
    from nsmb.semantics import Model

    return Model(("s", "t"), ((1, Fraction(3, 5)), (Fraction(3, 5), 1)), {"p": {"s"}})
