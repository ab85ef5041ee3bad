"""Small dense symbolic matrices (lists of rows of Expr)."""
from __future__ import annotations

from typing import Sequence

from .nodes import ONE, ZERO, Expr, add, div, is_const, mul, neg
from .simplify import normalize

Matrix = list[list[Expr]]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def normalized(m: Sequence[Sequence[Expr]]) -> Matrix:
    return [[normalize(x) for x in row] for row in m]


def matmul(a: Sequence[Sequence[Expr]], b: Sequence[Sequence[Expr]]) -> Matrix:
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = zeros(n, m)
    for i in range(n):
        for j in range(m):
            terms = [mul(a[i][t], b[t][j]) for t in range(k)
                     if not is_const(a[i][t], 0) and not is_const(b[t][j], 0)]
            out[i][j] = normalize(add(*terms))
    return out


def matvec(a: Sequence[Sequence[Expr]], v: Sequence[Expr]) -> list[Expr]:
    return [normalize(add(*(mul(a[i][t], v[t]) for t in range(len(v))))) for i in range(len(a))]


def transpose(a: Sequence[Sequence[Expr]]) -> Matrix:
    return [list(col) for col in zip(*a)]


def det(m: Sequence[Sequence[Expr]]) -> Expr:
    n = len(m)
    memo: dict[tuple, Expr] = {}

    def minor(rows: tuple, cols: tuple) -> Expr:
        key = (rows, cols)
        if key in memo:
            return memo[key]
        if len(rows) == 1:
            out = m[rows[0]][cols[0]]
        else:
            r = rows[0]
            rest = rows[1:]
            terms = []
            for k, c in enumerate(cols):
                entry = m[r][c]
                if is_const(entry, 0):
                    continue
                sub = minor(rest, cols[:k] + cols[k + 1:])
                if is_const(sub, 0):
                    continue
                t = mul(entry, sub)
                terms.append(t if k % 2 == 0 else neg(t))
            out = normalize(add(*terms))
        memo[key] = out
        return out

    if n == 0:
        return ONE
    return minor(tuple(range(n)), tuple(range(n)))


def adjugate(m: Sequence[Sequence[Expr]]) -> Matrix:
    n = len(m)
    if n == 1:
        return [[ONE]]
    adj = zeros(n, n)
    for i in range(n):
        for j in range(n):
            sub = [[m[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = det(sub)
            adj[j][i] = cof if (i + j) % 2 == 0 else normalize(neg(cof))
    return adj


def inverse(m: Sequence[Sequence[Expr]], determinant: Expr | None = None) -> Matrix:
    d = det(m) if determinant is None else determinant
    adj = adjugate(m)
    return [[normalize(div(x, d)) for x in row] for row in adj]
