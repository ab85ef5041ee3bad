"""Metrics and vector fields on a 4-coordinate chart."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import SingularMetric
from .expr import (ZERO, Expr, SymbolTable, add, differentiate, is_const, mul, neg, normalize,
                   sub, zero_test)
from .expr import linalg

Matrix = list[list[Expr]]


@dataclass(frozen=True)
class MetricSpec:
    """Covariant components g_ij; the stored primary object."""

    g_cov: tuple[tuple[Expr, ...], ...]
    signature_params: tuple[str, ...] = ()

    def __post_init__(self):
        g = tuple(tuple(row) for row in self.g_cov)
        object.__setattr__(self, "g_cov", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("metric must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if g[i][j] != g[j][i]:
                    raise ValueError(f"metric is not symmetric: g[{i}][{j}] = {g[i][j]} but g[{j}][{i}] = {g[j][i]}")

    @property
    def dim(self) -> int:
        return len(self.g_cov)

    def determinant(self) -> Expr:
        return linalg.det(self.g_cov)


@dataclass(frozen=True)
class VectorField:
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __getitem__(self, i: int) -> Expr:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)

    def apply(self, f: Expr, table: SymbolTable) -> Expr:
        """Directional derivative xi^i d_i f."""
        terms = [mul(x, differentiate(f, c)) for x, c in zip(self.components, table.coordinates)
                 if not is_const(x, 0)]
        return normalize(add(*terms))


@dataclass(frozen=True)
class PotentialCandidate:
    A: tuple[Expr, ...]
    gauge_note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))

    @classmethod
    def zero(cls, dim: int = 4, note: str = "zero potential") -> "PotentialCandidate":
        return cls(tuple(ZERO for _ in range(dim)), note)

    def is_structurally_zero(self) -> bool:
        return all(is_const(a, 0) for a in self.A)


def metric_inverse(g: MetricSpec, table: SymbolTable) -> Matrix:
    """Adjugate inverse, certified by g . g^-1 - I vanishing entrywise under the zero test."""
    d = g.determinant()
    if is_const(d, 0) or zero_test(d, table).zero:
        raise SingularMetric("metric determinant vanishes identically")
    g_inv = linalg.inverse(g.g_cov, d)
    prod = linalg.matmul(g.g_cov, g_inv)
    n = g.dim
    for i in range(n):
        for j in range(n):
            r = zero_test(sub(prod[i][j], 1 if i == j else 0), table)
            if not r.zero:
                raise SingularMetric(f"inverse certification failed at entry ({i},{j})", witness=r.witness)
    return g_inv


def killing_residual(g_inv: Sequence[Sequence[Expr]], xi: VectorField, table: SymbolTable) -> Matrix:
    """g^{il} xi^j_{,l} + g^{jl} xi^i_{,l} - g^{ij}_{,l} xi^l, symmetric by construction."""
    coords = table.coordinates
    n = len(coords)
    dxi = [[differentiate(xi[j], coords[l]) for l in range(n)] for j in range(n)]
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            terms = []
            for l in range(n):
                if not is_const(dxi[j][l], 0):
                    terms.append(mul(g_inv[i][l], dxi[j][l]))
                if not is_const(dxi[i][l], 0):
                    terms.append(mul(g_inv[j][l], dxi[i][l]))
                if not is_const(xi[l], 0):
                    terms.append(neg(mul(differentiate(g_inv[i][j], coords[l]), xi[l])))
            out[i][j] = out[j][i] = normalize(add(*terms))
    return out


def is_killing(g_inv: Sequence[Sequence[Expr]], xi: VectorField, table: SymbolTable) -> tuple[bool, dict | None]:
    res = killing_residual(g_inv, xi, table)
    n = len(res)
    for i in range(n):
        for j in range(i, n):
            r = zero_test(res[i][j], table)
            if not r.zero:
                return False, {"entry": [i, j], "point": r.witness, "value": r.value}
    return True, None


def faraday(A: PotentialCandidate, table: SymbolTable) -> Matrix:
    """F_ij = d_i A_j - d_j A_i (antisymmetric by construction)."""
    coords = table.coordinates
    n = len(coords)
    F = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            f = normalize(sub(differentiate(A.A[j], coords[i]), differentiate(A.A[i], coords[j])))
            F[i][j] = f
            F[j][i] = normalize(neg(f))
    return F
