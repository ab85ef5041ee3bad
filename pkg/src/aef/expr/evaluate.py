"""Numeric evaluation of expression trees, vectorized over many sample points."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import DivisionNearZero
from .nodes import Add, Call, Const, Coord, Expr, Func, Mul, Param, Pow

DELTA_DEN = 1e-6

_UFUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "atan": np.arctan,
}


class BatchResult:
    """Values at n points plus the per-point largest intermediate magnitude and a bad-point mask."""

    __slots__ = ("values", "scale", "bad")

    def __init__(self, values: np.ndarray, scale: np.ndarray, bad: np.ndarray):
        self.values = values
        self.scale = scale
        self.bad = bad


def evaluate_batch(e: Expr, env: Mapping[Expr, np.ndarray], n: int,
                   delta_den: float = DELTA_DEN) -> BatchResult:
    bad = np.zeros(n, dtype=bool)
    scale = np.zeros(n)
    memo: dict[int, np.ndarray] = {}

    def ev(node: Expr):
        nonlocal bad, scale
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            v = float(node.value)
        elif isinstance(node, (Coord, Param, Func)):
            try:
                v = env[node]
            except KeyError:
                raise KeyError(f"no value supplied for {node}") from None
        elif isinstance(node, Add):
            v = ev(node.terms[0])
            for t in node.terms[1:]:
                v = v + ev(t)
        elif isinstance(node, Mul):
            v = ev(node.factors[0])
            for f in node.factors[1:]:
                v = v * ev(f)
        elif isinstance(node, Pow):
            b = ev(node.base)
            ex = node.exponent
            if isinstance(ex, Const) and ex.value.denominator == 1:
                k = int(ex.value)
                if k < 0:
                    small = np.abs(b) < delta_den
                    bad = bad | small
                    b = np.where(small, 1.0, b)
                v = b ** k if k >= 0 else 1.0 / b ** (-k)
            else:
                x = ev(ex)
                nonpos = np.asarray(b) <= delta_den
                bad = bad | nonpos
                v = np.power(np.where(nonpos, 1.0, b), x)
        elif isinstance(node, Call):
            a = ev(node.arg)
            if node.fn == "log":
                nonpos = np.asarray(a) <= delta_den
                bad = bad | nonpos
                v = np.log(np.where(nonpos, 1.0, a))
            else:
                v = _UFUNCS[node.fn](a)
        else:
            raise TypeError(f"cannot evaluate {type(node).__name__}")
        scale = np.maximum(scale, np.abs(v))
        memo[key] = v
        return v

    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(ev(e), dtype=float), (n,)).copy()
        bad = bad | ~np.isfinite(values) | ~np.isfinite(scale)
    return BatchResult(values, scale, bad)


def _resolve(key, e: Expr) -> Expr:
    if isinstance(key, Expr):
        return key
    for node in _atoms_of(e):
        if isinstance(node, (Coord, Param)) and node.name == key:
            return node
        if isinstance(node, Func) and node.label == key:
            return node
    return Param(key)


def _atoms_of(e: Expr):
    from .nodes import atoms

    return atoms(e)


def evaluate(e: Expr, point: Mapping, delta_den: float = DELTA_DEN) -> float:
    """Evaluate at one point.  Keys are atoms or their names (`u1`, `c`, `a0(u0)`, `a0'(u0)`)."""
    env: dict[Expr, np.ndarray] = {}
    for key, value in point.items():
        env[_resolve(key, e)] = np.array([float(value)])
    res = evaluate_batch(e, env, 1, delta_den)
    if res.bad[0]:
        raise DivisionNearZero("denominator or log/power argument too close to zero, or non-finite value",
                               point=dict(point))
    return float(res.values[0])
