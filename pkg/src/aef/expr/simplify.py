"""Structural normalization: flatten, fold constants, collect like terms and powers.

No trigonometric or exponential identities are applied by `normalize`; the
zero test is responsible for those.  `tidy` additionally merges exponentials
and is meant for display only.
"""
from __future__ import annotations

from fractions import Fraction

from .nodes import (ONE, ZERO, Add, Call, Const, Expr, Mul, Pow, add, call, mul, power)


def _split_coeff(t: Expr) -> tuple[Fraction, Expr]:
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), t


def _split_power(f: Expr) -> tuple[Expr, Expr]:
    if isinstance(f, Pow):
        return f.base, f.exponent
    return f, ONE


def _collect_sum(terms: list[Expr]) -> Expr:
    coeffs: dict[Expr, Fraction] = {}
    order: list[Expr] = []
    for t in terms:
        c, m = _split_coeff(t)
        if m not in coeffs:
            coeffs[m] = Fraction(0)
            order.append(m)
        coeffs[m] += c
    out = [mul(Const(coeffs[m]), m) for m in order if coeffs[m] != 0]
    return add(*out)


def _collect_product(factors: list[Expr], norm) -> Expr:
    for _ in range(8):
        coeff = Fraction(1)
        exps: dict[Expr, list[Expr]] = {}
        order: list[Expr] = []
        for f in factors:
            if isinstance(f, Const):
                coeff *= f.value
                continue
            b, n = _split_power(f)
            if b not in exps:
                exps[b] = []
                order.append(b)
            exps[b].append(n)
        if coeff == 0:
            return ZERO
        rebuilt: list[Expr] = []
        for b in order:
            ns = exps[b]
            if all(isinstance(n, Const) for n in ns):
                n = Const(sum((n.value for n in ns), Fraction(0)))
            else:
                n = norm(add(*ns)) if len(ns) > 1 else ns[0]
            if isinstance(n, Const) and n.value == 0:
                continue
            rebuilt.append(_norm_power(b, n, norm))
        flat: list[Expr] = []
        for f in rebuilt:
            if isinstance(f, Mul):
                flat.extend(f.factors)
            else:
                flat.append(f)
        changed = len(flat) != len(rebuilt)
        if not changed:
            return mul(Const(coeff), *flat)
        factors = [Const(coeff)] + flat
    return mul(*factors)


def _norm_power(b: Expr, n: Expr, norm) -> Expr:
    if isinstance(n, Const) and n.value.denominator == 1 and isinstance(b, Pow):
        return _norm_power(b.base, norm(mul(b.exponent, n)), norm)
    out = power(b, n)
    if isinstance(out, Mul):
        return _collect_product(list(out.factors), norm)
    return out


def normalize(e: Expr) -> Expr:
    memo: dict[int, Expr] = {}
    keep: list[Expr] = []

    def norm(node: Expr) -> Expr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _norm(node)
        memo[key] = out
        keep.append(node)
        return out

    def _norm(node: Expr) -> Expr:
        if isinstance(node, Add):
            terms: list[Expr] = []
            for t in node.terms:
                t = norm(t)
                if isinstance(t, Add):
                    terms.extend(t.terms)
                else:
                    terms.append(t)
            return _collect_sum(terms)
        if isinstance(node, Mul):
            factors: list[Expr] = []
            for f in node.factors:
                f = norm(f)
                if isinstance(f, Mul):
                    factors.extend(f.factors)
                else:
                    factors.append(f)
            return _collect_product(factors, norm)
        if isinstance(node, Pow):
            return _norm_power(norm(node.base), norm(node.exponent), norm)
        if isinstance(node, Call):
            return call(node.fn, norm(node.arg))
        return node

    out = norm(e)
    # one more pass settles products whose factors were rewritten into sums
    again = norm(out)
    return again


def _merge_exp(e: Expr) -> Expr:
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Pow) and isinstance(node.base, Call) and node.base.fn == "exp":
            out = call("exp", mul(go(node.exponent), go(node.base.arg)))
        elif isinstance(node, Mul):
            args = []
            rest = []
            for f in node.factors:
                g = go(f)
                if isinstance(g, Call) and g.fn == "exp":
                    args.append(g.arg)
                else:
                    rest.append(g)
            out = mul(*rest, call("exp", add(*args))) if args else mul(*rest)
        elif isinstance(node, Add):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Pow):
            out = power(go(node.base), go(node.exponent))
        elif isinstance(node, Call):
            out = call(node.fn, go(node.arg))
        else:
            out = node
        memo[key] = out
        return out

    return go(e)


def tidy(e: Expr) -> Expr:
    """Display form: normalize and merge products of exponentials."""
    e = normalize(e)
    for _ in range(4):
        nxt = normalize(_merge_exp(e))
        if nxt == e:
            break
        e = nxt
    return e
