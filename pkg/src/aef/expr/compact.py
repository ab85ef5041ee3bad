"""Shorter equivalent forms for display.

`compact` proposes candidates (caller hints and a fitted monomial in the atoms
and elementary calls found in the expression) and keeps one only if the zero
test certifies it equal to the input and it renders shorter.  The result is
therefore always exactly equivalent on the sampled domain.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import numpy as np

from .calculus import substitute
from .evaluate import evaluate_batch
from .nodes import Add, Call, Const, Coord, Expr, Func, Mul, Param, Pow, add, atoms, call, mul, neg, power, sub, walk
from .parser import render
from .simplify import normalize, tidy
from .symbols import SymbolTable
from .zero import current_rng, finite_combinations, sample_points, zero_test

_MAX_DEN = 12


def _singletons(e: Expr, table: SymbolTable) -> dict:
    out = {}
    for a in atoms(e):
        if isinstance(a, Param) and a.name in table.parameters:
            d = table.parameters[a.name]
            if d.finite and len(d.values) == 1:
                out[a] = Const(Fraction(d.values[0]).limit_denominator(1000))
    return out


def _dictionary(e: Expr) -> list[Expr]:
    """Candidate monomial bases: atoms, elementary calls of a single coordinate, small sums."""
    bases: list[Expr] = []
    seen: set = set()

    def push(b: Expr):
        if b not in seen:
            seen.add(b)
            bases.append(b)

    for a in sorted(atoms(e), key=lambda a: a.sort_key()):
        if isinstance(a, (Coord, Func)) or isinstance(a, Param):
            push(a)
    calls = [n for n in walk(e) if isinstance(n, Call)]
    for c in sorted(calls, key=lambda c: c.sort_key()):
        coords = [a for a in atoms(c.arg) if isinstance(a, Coord)]
        if len(coords) != 1:
            continue
        x = coords[0]
        if c.fn == "exp":
            push(call("exp", x))
        elif c.fn in ("sin", "cos"):
            push(call("sin", x))
            push(call("cos", x))
        elif c.fn in ("sinh", "cosh"):
            push(call("sinh", x))
            push(call("cosh", x))
    sums = [n for n in walk(e) if isinstance(n, Add) and len(render(n)) <= 40]
    for s in sorted(sums, key=lambda s: len(render(s)))[:4]:
        push(s)
    return bases


def _snap(x: float, den: int = _MAX_DEN) -> Fraction | None:
    f = Fraction(x).limit_denominator(den)
    return f if abs(float(f) - x) < 1e-6 * max(1.0, abs(x)) else None


def _fit_monomial(e: Expr, table: SymbolTable, rng: np.random.Generator) -> Expr | None:
    bases = _dictionary(e)
    if not bases:
        return None
    symbols = sorted(atoms(e) | set().union(*(atoms(b) for b in bases)), key=lambda a: a.sort_key())
    n = 4 * len(bases) + 16
    coeffs = []
    exps_all = []
    for combo in finite_combinations(symbols, table):
        env = sample_points(symbols, table, n, rng, fixed=combo)
        with np.errstate(all="ignore"):
            res = evaluate_batch(e, env, n)
            cols = [evaluate_batch(b, env, n) for b in bases]
        good = ~res.bad & (np.abs(res.values) > 1e-9)
        for c in cols:
            good &= ~c.bad & (np.abs(c.values) > 1e-9)
        if good.sum() < len(bases) + 4:
            return None
        y = np.log(np.abs(res.values[good]))
        X = np.column_stack([np.log(np.abs(c.values[good])) for c in cols] + [np.ones(int(good.sum()))])
        sol, *_ = np.linalg.lstsq(X, y, rcond=None)
        exps = [_snap(v) for v in sol[:-1]]
        if any(k is None for k in exps):
            return None
        mono = np.ones(int(good.sum()))
        for k, c in zip(exps, cols):
            mono = mono * np.abs(c.values[good]) ** float(k) * np.sign(c.values[good]) ** (k.numerator % 2 if k.denominator == 1 else 0)
        ratio = res.values[good] / mono
        if not np.allclose(ratio, ratio[0], rtol=1e-7, atol=0):
            return None
        coeffs.append(ratio[0])
        exps_all.append(tuple(exps))
    if len(set(exps_all)) != 1:
        return None
    c0 = _snap(coeffs[0], 1000)
    if c0 is None or any(abs(c - coeffs[0]) > 1e-7 * abs(coeffs[0]) for c in coeffs):
        return None
    factors = [Const(c0)] + [power(b, Const(k)) for b, k in zip(bases, exps_all[0]) if k != 0]
    return tidy(mul(*factors))


def _equal(a: Expr, b: Expr, table: SymbolTable) -> bool:
    try:
        return zero_test(normalize(sub(a, b)), table).zero
    except Exception:
        return False


def compact(e: Expr, table: SymbolTable, hints: Iterable[Expr] = (), _memo: dict | None = None) -> Expr:
    """A certified-equal form of `e` that renders no longer than `tidy(e)`."""
    base = tidy(e)
    if isinstance(base, (Const, Coord, Param, Func)):
        return base
    memo = {} if _memo is None else _memo
    if base in memo:
        return memo[base]
    if _equal(base, Const(0), table):
        memo[base] = Const(0)
        return memo[base]
    rng = current_rng()
    best, best_len = base, len(render(base))
    cands: list[Expr] = []
    for h in hints:
        cands += [h, normalize(neg(h))]
    fixed = _singletons(base, table)
    if fixed:
        reduced = tidy(substitute(base, fixed))
        cands.append(reduced)
    else:
        reduced = base
    try:
        fit = _fit_monomial(reduced, table, rng)
    except (ValueError, KeyError, np.linalg.LinAlgError):
        fit = None
    if fit is not None:
        cands.append(fit)
    for c in cands:
        n = len(render(c))
        if n < best_len and _equal(c, base, table):
            best, best_len = c, n
    if best is base and isinstance(base, (Add, Mul, Pow)):
        # no closed form for the whole: shorten the parts and try once more
        if isinstance(base, Add):
            rebuilt = tidy(add(*(compact(t, table, (), memo) for t in base.terms)))
        elif isinstance(base, Mul):
            rebuilt = tidy(mul(*(compact(f, table, (), memo) for f in base.factors)))
        else:
            rebuilt = tidy(power(compact(base.base, table, (), memo), base.exponent))
        if len(render(rebuilt)) < best_len:
            best, best_len = rebuilt, len(render(rebuilt))
            try:
                fit = _fit_monomial(rebuilt, table, rng)
            except (ValueError, KeyError, np.linalg.LinAlgError):
                fit = None
            if fit is not None and len(render(fit)) < best_len and _equal(fit, base, table):
                best = fit
    memo[base] = best
    return best


def compact_matrix(m, table: SymbolTable) -> list[list[Expr]]:
    return [[compact(x, table) for x in row] for row in m]


__all__ = ["compact", "compact_matrix"]
