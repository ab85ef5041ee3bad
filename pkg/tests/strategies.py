"""Hypothesis strategies for expressions over a small symbol table."""

from hypothesis import strategies as st

from aef.expr import Const, Coord, Param, SymbolTable, Domain, add, call, mul, power, sub

TABLE = SymbolTable(parameters={"c": Domain(intervals=((0.2, 0.9),))})
COORDS = [Coord(n) for n in ("u0", "u1", "u2", "u3")]

leaves = st.one_of(
    st.sampled_from(COORDS),
    st.just(Param("c")),
    st.integers(-3, 3).map(Const),
    st.fractions(min_value=-2, max_value=2, max_denominator=4).map(Const),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: add(*t)),
        st.tuples(children, children).map(lambda t: sub(*t)),
        st.tuples(children, children).map(lambda t: mul(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: power(t[0], t[1])),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: call(t[0], t[1])),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)
# polynomial-only expressions in u1..u3 with integer coefficients
polys = st.recursive(
    st.one_of(st.sampled_from(COORDS[1:]), st.integers(-4, 4).map(Const)),
    lambda ch: st.one_of(st.tuples(ch, ch).map(lambda t: add(*t)), st.tuples(ch, ch).map(lambda t: mul(*t))),
    max_leaves=10,
)
coord_names = st.sampled_from(["u0", "u1", "u2", "u3"])
