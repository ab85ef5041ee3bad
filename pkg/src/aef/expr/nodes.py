"""Immutable expression nodes and the light-weight smart constructors.

The constructors flatten nested sums/products, fold numeric constants and
sort operands into a canonical order.  They never apply identities beyond
that; the heavier rewriting lives in `simplify.normalize`.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

ELEMENTARY = ("exp", "log", "sin", "cos", "sinh", "cosh", "atan")

Number = Union[int, Fraction]


class Expr:
    __slots__ = ("_hash", "_key")

    def __init__(self):
        self._hash = None
        self._key = None

    # structural identity -------------------------------------------------
    def fields(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple:
        return ()

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = self._hash = hash((type(self).__name__,) + self.fields())
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not type(self):
            return False
        if hash(self) != hash(other):
            return False
        return self.fields() == other.fields()

    def __ne__(self, other) -> bool:
        return not self == other

    def sort_key(self) -> tuple:
        k = self._key
        if k is None:
            k = self._key = self._make_key()
        return k

    def _make_key(self) -> tuple:
        raise NotImplementedError

    # arithmetic sugar ----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, other):
        return power(self, other)

    def __repr__(self) -> str:
        from .parser import render

        return f"Expr({render(self)!r})"

    def __str__(self) -> str:
        from .parser import render

        return render(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        super().__init__()
        self.value = Fraction(value)

    def fields(self) -> tuple:
        return (self.value,)

    def _make_key(self) -> tuple:
        return (0, self.value)


class Coord(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def fields(self) -> tuple:
        return (self.name,)

    def _make_key(self) -> tuple:
        return (1, self.name)


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def fields(self) -> tuple:
        return (self.name,)

    def _make_key(self) -> tuple:
        return (2, self.name)


class Func(Expr):
    """Opaque unary function `name` applied to coordinate `var`, differentiated `order` times."""

    __slots__ = ("name", "var", "order")

    def __init__(self, name: str, var: str, order: int = 0):
        super().__init__()
        self.name = name
        self.var = var
        self.order = order

    def fields(self) -> tuple:
        return (self.name, self.var, self.order)

    def _make_key(self) -> tuple:
        return (3, self.name, self.order, self.var)

    @property
    def label(self) -> str:
        return f"{self.name}{chr(39) * self.order}({self.var})"


class Call(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        super().__init__()
        if fn not in ELEMENTARY:
            raise ValueError(f"unknown elementary function {fn!r}")
        self.fn = fn
        self.arg = arg

    def fields(self) -> tuple:
        return (self.fn, self.arg)

    def children(self) -> tuple:
        return (self.arg,)

    def _make_key(self) -> tuple:
        return (4, self.fn, self.arg.sort_key())


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Expr):
        super().__init__()
        self.base = base
        self.exponent = exponent

    def fields(self) -> tuple:
        return (self.base, self.exponent)

    def children(self) -> tuple:
        return (self.base, self.exponent)

    def _make_key(self) -> tuple:
        return (5, self.base.sort_key(), self.exponent.sort_key())


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        super().__init__()
        self.factors = tuple(factors)

    def fields(self) -> tuple:
        return self.factors

    def children(self) -> tuple:
        return self.factors

    def _make_key(self) -> tuple:
        return (6, tuple(f.sort_key() for f in self.factors))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        super().__init__()
        self.terms = tuple(terms)

    def fields(self) -> tuple:
        return self.terms

    def children(self) -> tuple:
        return self.terms

    def _make_key(self) -> tuple:
        return (7, tuple(t.sort_key() for t in self.terms))


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, float):
        return Const(Fraction(x).limit_denominator(10**12))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_const(e: Expr, value: Number | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def add(*terms) -> Expr:
    flat: list[Expr] = []
    const = Fraction(0)
    stack = [as_expr(t) for t in terms]
    for t in stack:
        if isinstance(t, Add):
            for s in t.terms:
                if isinstance(s, Const):
                    const += s.value
                else:
                    flat.append(s)
        elif isinstance(t, Const):
            const += t.value
        else:
            flat.append(t)
    flat.sort(key=Expr.sort_key)
    if const != 0:
        flat.append(Const(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    const = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Mul):
            for g in f.factors:
                if isinstance(g, Const):
                    const *= g.value
                else:
                    flat.append(g)
        elif isinstance(f, Const):
            const *= f.value
        else:
            flat.append(f)
    if const == 0:
        return ZERO
    flat.sort(key=Expr.sort_key)
    if const != 1 or not flat:
        flat.insert(0, Const(const))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def power(base, exponent) -> Expr:
    base = as_expr(base)
    exponent = as_expr(exponent)
    if isinstance(exponent, Const):
        n = exponent.value
        if n == 0:
            return ONE
        if n == 1:
            return base
        if n.denominator == 1:
            if isinstance(base, Const):
                if base.value == 0 and n < 0:
                    raise ZeroDivisionError("division by the literal zero")
                return Const(base.value ** int(n))
            if isinstance(base, Pow) and isinstance(base.exponent, Const):
                return power(base.base, Const(base.exponent.value * n))
            if isinstance(base, Mul):
                return mul(*(power(f, exponent) for f in base.factors))
    if is_const(base, 1):
        return ONE
    return Pow(base, exponent)


def div(a, b) -> Expr:
    b = as_expr(b)
    if is_const(b, 0):
        raise ZeroDivisionError("division by the literal zero")
    return mul(a, power(b, MINUS_ONE))


_CALL_AT_ZERO = {"exp": ONE, "sin": ZERO, "cos": ONE, "sinh": ZERO, "cosh": ONE, "atan": ZERO}


def call(fn: str, arg) -> Expr:
    arg = as_expr(arg)
    if is_const(arg, 0) and fn in _CALL_AT_ZERO:
        return _CALL_AT_ZERO[fn]
    if fn == "log" and is_const(arg, 1):
        return ZERO
    return Call(fn, arg)


def exp(x) -> Expr:
    return call("exp", x)


def log(x) -> Expr:
    return call("log", x)


def sin(x) -> Expr:
    return call("sin", x)


def cos(x) -> Expr:
    return call("cos", x)


def sinh(x) -> Expr:
    return call("sinh", x)


def cosh(x) -> Expr:
    return call("cosh", x)


def atan(x) -> Expr:
    return call("atan", x)


def total(items: Iterable) -> Expr:
    return add(*items)


def walk(e: Expr):
    """Pre-order traversal visiting shared subtrees once."""
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children())


def atoms(e: Expr) -> set:
    """Coordinates, parameters and opaque applications reachable in `e`."""
    return {n for n in walk(e) if isinstance(n, (Coord, Param, Func))}


def depends_on(e: Expr, coord: str) -> bool:
    for n in walk(e):
        if isinstance(n, Coord) and n.name == coord:
            return True
        if isinstance(n, Func) and n.var == coord:
            return True
    return False
