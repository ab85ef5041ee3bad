"""Formal differentiation and substitution."""
from __future__ import annotations

from typing import Callable, Mapping

from .nodes import (ONE, ZERO, Add, Call, Const, Coord, Expr, Func, Mul, Param, Pow, add, call,
                    cos, cosh, depends_on, is_const, log, mul, power, sin, sinh, sub)


def rebuild(node: Expr, children: list[Expr]) -> Expr:
    """Reassemble `node` from new children through the smart constructors."""
    if isinstance(node, Add):
        return add(*children)
    if isinstance(node, Mul):
        return mul(*children)
    if isinstance(node, Pow):
        return power(children[0], children[1])
    if isinstance(node, Call):
        return call(node.fn, children[0])
    return node


def transform(e: Expr, leaf: Callable[[Expr], Expr | None]) -> Expr:
    """Bottom-up rewrite; `leaf` may replace any node (returning None keeps it)."""
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = leaf(node)
        if out is None:
            kids = node.children()
            if kids:
                new = [go(k) for k in kids]
                out = node if all(a is b for a, b in zip(new, kids)) else rebuild(node, new)
            else:
                out = node
        memo[key] = out
        return out

    return go(e)


def differentiate(e: Expr, coord: str) -> Expr:
    memo: dict[int, Expr] = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _d(node)
        memo[key] = out
        return out

    def _d(node: Expr) -> Expr:
        if isinstance(node, (Const, Param)):
            return ZERO
        if isinstance(node, Coord):
            return ONE if node.name == coord else ZERO
        if isinstance(node, Func):
            return Func(node.name, node.var, node.order + 1) if node.var == coord else ZERO
        if isinstance(node, Add):
            return add(*(d(t) for t in node.terms))
        if isinstance(node, Mul):
            terms = []
            fs = node.factors
            for i, f in enumerate(fs):
                df = d(f)
                if is_const(df, 0):
                    continue
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
            return add(*terms)
        if isinstance(node, Pow):
            b, n = node.base, node.exponent
            if not depends_on(n, coord):
                db = d(b)
                if is_const(db, 0):
                    return ZERO
                return mul(n, power(b, sub(n, 1)), db)
            return mul(node, add(mul(d(n), log(b)), mul(n, d(b), power(b, -1))))
        if isinstance(node, Call):
            a = node.arg
            da = d(a)
            if is_const(da, 0):
                return ZERO
            fn = node.fn
            if fn == "exp":
                return mul(node, da)
            if fn == "log":
                return mul(da, power(a, -1))
            if fn == "sin":
                return mul(cos(a), da)
            if fn == "cos":
                return mul(-1, sin(a), da)
            if fn == "sinh":
                return mul(cosh(a), da)
            if fn == "cosh":
                return mul(sinh(a), da)
            if fn == "atan":
                return mul(da, power(add(1, power(a, 2)), -1))
        raise TypeError(f"cannot differentiate {type(node).__name__}")

    return d(e)


def gradient(e: Expr, coords) -> list[Expr]:
    return [differentiate(e, c) for c in coords]


def substitute(e: Expr, mapping: Mapping[Expr, Expr]) -> Expr:
    """Replace whole subtrees (typically atoms) by expressions."""
    if not mapping:
        return e
    return transform(e, lambda node: mapping.get(node))


def substitute_function(e: Expr, name: str, replacement: Expr) -> Expr:
    """Replace opaque `name` and its formal derivatives by a closed form and its derivatives."""
    cache: dict[int, Expr] = {}

    def leaf(node: Expr):
        if isinstance(node, Func) and node.name == name:
            if node.order not in cache:
                r = replacement
                for _ in range(node.order):
                    r = differentiate(r, node.var)
                cache[node.order] = r
            return cache[node.order]
        return None

    return transform(e, leaf)
