"""Text grammar for expressions: a precedence-climbing parser and its inverse printer.

Precedence, tightest first: `^` (right associative), unary `-`, `* /`, `+ -`.
Opaque functions are written `a0(u0)`; formal derivatives `a0'(u0)`, `a0''(u0)`.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError
from .nodes import (ELEMENTARY, Add, Call, Const, Coord, Expr, Func, Mul, Param, Pow, add, call,
                    div, mul, neg, power, sub)
from .symbols import SymbolTable

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<prime>'+)|(?P<op>[-+*/^(),]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    text = text.replace("−", "-")
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError("unexpected character", pos + len(text[pos:]) - len(text[pos:].lstrip()), text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, table: SymbolTable):
        self.text = text
        self.table = table
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind != "op":
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos, self.text)

    def error(self, message: str, pos: int):
        raise ParseError(message, pos, self.text)

    def parse(self) -> Expr:
        e = self.sum()
        kind, v, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {v!r}", pos)
        return e

    def sum(self) -> Expr:
        left = self.product()
        while True:
            kind, v, _ = self.peek()
            if kind == "op" and v in "+-":
                self.take()
                right = self.product()
                left = add(left, right) if v == "+" else sub(left, right)
            else:
                return left

    def product(self) -> Expr:
        left = self.unary()
        while True:
            kind, v, pos = self.peek()
            if kind == "op" and v in "*/":
                self.take()
                right = self.unary()
                if v == "*":
                    left = mul(left, right)
                else:
                    try:
                        left = div(left, right)
                    except ZeroDivisionError:
                        self.error("division by zero", pos)
            else:
                return left

    def unary(self) -> Expr:
        kind, v, _ = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return neg(self.unary())
        if kind == "op" and v == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        kind, v, pos = self.peek()
        if kind == "op" and v == "^":
            self.take()
            exponent = self.unary()
            try:
                return power(base, exponent)
            except ZeroDivisionError:
                self.error("zero raised to a negative power", pos)
        return base

    def primary(self) -> Expr:
        kind, v, pos = self.take()
        if kind == "num":
            return Const(Fraction(v))
        if kind == "op" and v == "(":
            e = self.sum()
            self.expect(")")
            return e
        if kind == "name":
            return self.named(v, pos)
        self.error(f"unexpected {v or 'end of input'!r}", pos)

    def named(self, name: str, pos: int) -> Expr:
        order = 0
        kind, v, ppos = self.peek()
        if kind == "prime":
            self.take()
            order = len(v)
        kind, v, _ = self.peek()
        applied = kind == "op" and v == "("
        table = self.table
        if order and (name not in table.functions or not applied):
            self.error(f"derivative mark on {name!r}, which is not an applied opaque function", ppos)
        if applied:
            self.take()
            args = [self.sum()]
            while self.peek()[1] == "," and self.peek()[0] == "op":
                self.take()
                args.append(self.sum())
            self.expect(")")
            if name in ELEMENTARY:
                if len(args) != 1:
                    self.error(f"{name} takes exactly one argument, got {len(args)}", pos)
                return call(name, args[0])
            if name in table.functions:
                var = table.functions[name]
                if len(args) != 1:
                    self.error(f"{name} takes exactly one argument, got {len(args)}", pos)
                if args[0] != Coord(var):
                    self.error(f"opaque function {name} must be applied to {var}", pos)
                return Func(name, var, order)
            if name in table.coordinates or name in table.parameters:
                self.error(f"{name} is not a function", pos)
            self.error(f"undeclared function {name!r}", pos)
        if name in table.coordinates:
            return Coord(name)
        if name in table.parameters:
            return Param(name)
        if name in table.functions:
            self.error(f"opaque function {name} must be applied to {table.functions[name]}", pos)
        if name in ELEMENTARY:
            self.error(f"{name} needs an argument", pos)
        self.error(f"undeclared identifier {name!r}", pos)


def parse(text: str, table: SymbolTable) -> Expr:
    if not isinstance(text, str):
        text = str(text)
    return _Parser(text, table).parse()


# ---------------------------------------------------------------- printer

SUM, PRODUCT, UNARY, POWER, ATOM = 1, 2, 3, 4, 5


def _const(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        return (str(v.numerator), ATOM if v >= 0 else UNARY)
    return (f"{v.numerator}/{v.denominator}", PRODUCT)


def _wrap(item: tuple[str, int], minimum: int) -> str:
    text, prec = item
    return text if prec >= minimum else f"({text})"


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    return isinstance(e, Mul) and isinstance(e.factors[0], Const) and e.factors[0].value < 0


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _const(e.value)
    if isinstance(e, (Coord, Param)):
        return (e.name, ATOM)
    if isinstance(e, Func):
        return (e.label, ATOM)
    if isinstance(e, Call):
        return (f"{e.fn}({_render(e.arg)[0]})", ATOM)
    if isinstance(e, Pow):
        if isinstance(e.exponent, Const) and e.exponent.value < 0 and e.exponent.value.denominator == 1:
            return _render_product(Const(1), [e])
        base = _wrap(_render(e.base), ATOM)
        exponent = _render(e.exponent)
        if exponent[1] < ATOM:
            return (f"{base}^({exponent[0]})", POWER)
        return (f"{base}^{exponent[0]}", POWER)
    if isinstance(e, Mul):
        factors = list(e.factors)
        c = Const(1)
        if isinstance(factors[0], Const):
            c = factors.pop(0)
        return _render_product(c, factors)
    if isinstance(e, Add):
        parts = []
        for k, t in enumerate(e.terms):
            if k == 0:
                parts.append(_render(t)[0])
            elif _is_negative(t):
                parts.append(" - " + _wrap(_render(neg(t)), PRODUCT))
            else:
                parts.append(" + " + _wrap(_render(t), PRODUCT))
        return ("".join(parts), SUM)
    raise TypeError(f"cannot render {type(e).__name__}")


def _render_product(c: Const, factors: list[Expr]) -> tuple[str, int]:
    num: list[str] = []
    den: list[str] = []
    p, q = c.value.numerator, c.value.denominator
    if abs(p) != 1:
        num.append(str(abs(p)))
    if q != 1:
        den.append(str(q))
    for f in factors:
        if isinstance(f, Pow) and isinstance(f.exponent, Const) and f.exponent.value < 0 \
                and f.exponent.value.denominator == 1:
            den.append(_wrap(_render(power(f.base, -f.exponent.value)), POWER))
        else:
            num.append(_wrap(_render(f), POWER))
    text = "*".join(num) if num else "1"
    if den:
        text += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    if p < 0:
        return ("-" + text, SUM)
    return (text, PRODUCT)


def render(e: Expr) -> str:
    return _render(e)[0]
