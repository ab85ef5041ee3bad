import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from aef.errors import DivisionNearZero, ParseError, SamplingExhausted
from aef.expr import (ONE, SIGNS, ZERO, Func, Param, SymbolTable, add, compile_exprs, cos,
                      differentiate, div, evaluate, exp, is_zero, mul, normalize, parse, power, render, sin, sub,
                      substitute_function, tidy, zero_test, zero_test_settings)
from aef.expr.compact import compact

from strategies import COORDS, TABLE, coord_names, exprs, polys

u0, u1, u2, u3 = COORDS
c = Param("c")


def same(a, b):
    return zero_test(normalize(sub(a, b)), TABLE).zero


# ---------------------------------------------------------------- parsing and printing

def test_parse_precedence():
    e = parse("-u1^2 + 2*u2/u3", TABLE)
    assert evaluate(e, {"u1": 3, "u2": 1, "u3": 4}) == pytest.approx(-9 + 0.5)


def test_power_is_right_associative():
    e = parse("u1^2^3", TABLE)
    assert evaluate(e, {"u1": 1.1}) == pytest.approx(1.1 ** 8)


def test_opaque_function_needs_argument():
    table = TABLE.extended(functions={"a0": "u0"})
    assert parse("a0(u0)", table) == Func("a0", "u0")
    with pytest.raises(ParseError):
        parse("a0 + 1", table)


def test_unknown_symbol_is_rejected():
    with pytest.raises(ParseError):
        parse("u1 + zz", TABLE)


def test_prime_denotes_formal_derivative():
    table = TABLE.extended(functions={"a0": "u0"})
    assert parse("a0''(u0)", table) == Func("a0", "u0", 2)


@given(exprs)
def test_render_parse_round_trip(e):
    assert normalize(parse(render(e), TABLE)) == normalize(e)


# ---------------------------------------------------------------- differentiation

@given(exprs, exprs, coord_names, st.integers(-3, 3))
def test_differentiation_is_linear(f, g, x, k):
    lhs = differentiate(add(f, mul(k, g)), x)
    rhs = add(differentiate(f, x), mul(k, differentiate(g, x)))
    assert same(lhs, rhs)


@given(exprs, exprs, coord_names)
def test_product_rule(f, g, x):
    lhs = differentiate(mul(f, g), x)
    rhs = add(mul(differentiate(f, x), g), mul(f, differentiate(g, x)))
    assert same(lhs, rhs)


@given(exprs, coord_names, coord_names)
def test_mixed_partials_commute(f, x, y):
    assert same(differentiate(differentiate(f, x), y), differentiate(differentiate(f, y), x))


def test_derivative_matches_finite_difference():
    e = parse("sin(u1*u2) * exp(-u1) / (1 + u1^2)", TABLE)
    d = differentiate(e, "u1")
    h = 1e-6
    at = {"u1": 0.7, "u2": -1.3}
    fd = (evaluate(e, {**at, "u1": 0.7 + h}) - evaluate(e, {**at, "u1": 0.7 - h})) / (2 * h)
    assert evaluate(d, at) == pytest.approx(fd, rel=1e-7)


def test_opaque_function_derivatives_and_substitution():
    table = TABLE.extended(functions={"a0": "u0"})
    e = parse("a0(u0)^2 * u1", table)
    d = differentiate(e, "u0")
    assert d == normalize(parse("2*a0(u0)*a0'(u0)*u1", table))
    assert differentiate(e, "u2") == ZERO
    closed = substitute_function(d, "a0", sin(u0))
    assert same(closed, mul(2, sin(u0), cos(u0), u1))


# ---------------------------------------------------------------- normalization

@given(exprs)
def test_normalize_is_idempotent(e):
    n = normalize(e)
    assert normalize(n) == n


@given(exprs)
def test_normalize_preserves_value(e):
    assert same(e, normalize(e))


def test_like_terms_collect():
    assert normalize(parse("u1*u2 + 2*u2*u1 - 3*u1*u2", TABLE)) == ZERO
    assert normalize(parse("u1*u1^2/u1^3", TABLE)) == ONE


def test_tidy_merges_exponentials():
    e = mul(exp(u3), exp(mul(-1, u3)), u1)
    assert tidy(e) == u1


# ---------------------------------------------------------------- zero test

def test_trig_and_exponential_identities_are_recognized():
    assert is_zero(sub(add(power(sin(u1), 2), power(cos(u1), 2)), 1), TABLE)
    assert is_zero(sub(mul(exp(u1), exp(u2)), exp(add(u1, u2))), TABLE)
    assert is_zero(sub(sin(mul(2, u1)), mul(2, sin(u1), cos(u1))), TABLE)


def test_zero_test_reports_a_witness():
    r = zero_test(sub(u1, u2), TABLE)
    assert not r.zero
    assert abs(r.witness["u1"] - r.witness["u2"]) > 0


def test_finite_parameter_branches_are_all_tested():
    table = SymbolTable(parameters={"e": SIGNS})
    e = parse("e^2 - 1", table)
    assert is_zero(e, table)
    r = zero_test(parse("e - 1", table), table)
    assert not r.zero and r.witness["e"] == -1.0


def test_zero_test_soundness_battery():
    """1000 random nonzero integer polynomials: none may be declared zero."""
    rng = np.random.default_rng(2024)
    false_positives = 0
    for _ in range(1000):
        nterms = rng.integers(1, 6)
        exps = {tuple(rng.integers(0, 4, size=3)) for _ in range(nterms)}
        terms = []
        for ex in exps:
            coeff = int(rng.choice([-1, 1]) * rng.integers(1, 1000))
            terms.append(mul(coeff, *(power(x, int(k)) for x, k in zip(COORDS[1:], ex))))
        p = add(*terms)
        assert normalize(p) != ZERO
        if zero_test(p, TABLE).zero:
            false_positives += 1
    assert false_positives == 0


@given(polys, polys)
def test_polynomial_identity_expansion(p, q):
    expanded = normalize(add(mul(p, p), mul(2, p, q), mul(q, q)))
    assert is_zero(sub(power(add(p, q), 2), expanded), TABLE)


def test_singular_everywhere_exhausts_sampling():
    hidden_zero = sub(add(power(sin(u1), 2), power(cos(u1), 2)), 1)
    with zero_test_settings(max_rounds=3):
        with pytest.raises(SamplingExhausted):
            zero_test(div(u2, hidden_zero), TABLE)


def test_evaluate_refuses_near_zero_denominator():
    with pytest.raises(DivisionNearZero):
        evaluate(div(1, u1), {"u1": 1e-9})


def test_same_seed_same_witness():
    e = sub(mul(u1, u2), add(u1, u2))
    with zero_test_settings(seed=7):
        a = zero_test(e, TABLE).witness
    with zero_test_settings(seed=7):
        b = zero_test(e, TABLE).witness
    assert a == b


# ---------------------------------------------------------------- compiled evaluation and display forms

@given(exprs)
def test_compiled_code_agrees_with_interpreter(e):
    f = compile_exprs([e], [u0, u1, u2, u3, c])
    at = {"u0": 0.3, "u1": -0.7, "u2": 1.1, "u3": 0.45, "c": 0.5}
    try:
        want = evaluate(e, at)
    except DivisionNearZero:
        return
    got = f(0.3, -0.7, 1.1, 0.45, 0.5)[0]
    assume(math.isfinite(want))
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_compact_finds_monomial_and_stays_equal():
    table = SymbolTable()
    e = normalize(div(mul(sin(u1), add(power(cos(u3), 2), power(sin(u3), 2))), mul(cos(u1), exp(u3), exp(mul(-1, u3)))))
    got = compact(e, table)
    assert len(render(got)) < len(render(tidy(e)))
    assert is_zero(sub(got, e), table)


def test_compact_never_changes_value():
    e = normalize(add(mul(u1, u2), Fraction(1, 3)))
    got = compact(e, TABLE)
    assert is_zero(sub(got, e), TABLE)
