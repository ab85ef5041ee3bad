"""Commutators, structure constants, and the reduction frame (lambda, omega, C-tilde).

Operator indices are 0-based here (X1..X4 -> 0..3); coordinates u0..u3 keep their
natural indices, and the transitive (orbit) coordinates are u1..u3.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (CertificationFailed, DegenerateBlock, InconsistentDependentOperator,
                     NonConstantCoefficients, NotClosed)
from .expr import (ZERO, Const, Coord, Expr, Param, SymbolTable, add, atoms, differentiate, div,
                   evaluate_batch, is_const, mul, neg, normalize, render, sample_points, sub,
                   substitute, zero_test)
from .expr import linalg
from .expr.zero import current_rng, finite_combinations
from .geometry import VectorField

ORBIT = (1, 2, 3)


def commutator(x: VectorField, y: VectorField, table: SymbolTable) -> VectorField:
    """[x, y]^i = x^j d_j y^i - y^j d_j x^i."""
    return VectorField(tuple(normalize(sub(x.apply(y[i], table), y.apply(x[i], table)))
                             for i in range(len(x))))


@dataclass(frozen=True)
class KillingBasis:
    xi: tuple[VectorField, ...]
    independent: tuple[int, ...] = (0, 1, 2)
    dependent: int = 3

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(self.xi))
        if len(self.xi) != 4:
            raise ValueError(f"expected 4 operators, got {len(self.xi)}")

    def __getitem__(self, a: int) -> VectorField:
        return self.xi[a]

    def __len__(self) -> int:
        return len(self.xi)

    def block(self) -> list[list[Expr]]:
        """Rows: independent operators; columns: orbit coordinates u1..u3."""
        return [[self.xi[a][b] for b in ORBIT] for a in self.independent]


@dataclass(frozen=True)
class StructureConstants:
    """C[D][A][B] with 0-based indices, antisymmetric in (A, B)."""

    C: tuple

    @classmethod
    def from_entries(cls, entries: Mapping[tuple[int, int, int], Expr], n: int = 4) -> "StructureConstants":
        table = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        seen: dict[tuple[int, int, int], Expr] = {}
        for (d, a, b), v in entries.items():
            if a == b:
                if not is_const(v, 0):
                    raise ValueError(f"C^{d + 1}_{a + 1}{b + 1} must vanish")
                continue
            lo, hi, val = (a, b, v) if a < b else (b, a, normalize(neg(v)))
            if (d, lo, hi) in seen and seen[(d, lo, hi)] != val:
                raise ValueError(f"conflicting entries for C^{d + 1}_{lo + 1}{hi + 1}")
            seen[(d, lo, hi)] = val
            table[d][lo][hi] = val
            table[d][hi][lo] = normalize(neg(val))
        return cls(tuple(tuple(tuple(r) for r in m) for m in table))

    @classmethod
    def zero(cls, n: int = 4) -> "StructureConstants":
        return cls.from_entries({}, n)

    @property
    def n(self) -> int:
        return len(self.C)

    def __call__(self, d: int, a: int, b: int) -> Expr:
        return self.C[d][a][b]

    def items(self) -> list[tuple[tuple[int, int, int], Expr]]:
        """Nonzero entries with A < B, sorted by (A, B, D)."""
        n = self.n
        out = []
        for a in range(n):
            for b in range(a + 1, n):
                for d in range(n):
                    v = self.C[d][a][b]
                    if not is_const(v, 0):
                        out.append(((d, a, b), v))
        return out

    def to_json(self) -> dict:
        """{"AB": {"D": expr}} with 1-based labels."""
        out: dict[str, dict[str, str]] = {}
        for (d, a, b), v in self.items():
            out.setdefault(f"{a + 1}{b + 1}", {})[str(d + 1)] = render(v)
        return out

    def jacobi_residuals(self) -> list[tuple[tuple[int, int, int, int], Expr]]:
        n = self.n
        out = []
        for a, b, c in itertools.combinations(range(n), 3):
            for f in range(n):
                terms = []
                for e in range(n):
                    for (x, y, z) in ((a, b, c), (b, c, a), (c, a, b)):
                        p, q = self.C[e][x][y], self.C[f][e][z]
                        if not is_const(p, 0) and not is_const(q, 0):
                            terms.append(mul(p, q))
                out.append(((a, b, c, f), normalize(add(*terms))))
        return out


def structure_residual(basis: KillingBasis, C: StructureConstants, a: int, b: int,
                       table: SymbolTable) -> list[Expr]:
    br = commutator(basis[a], basis[b], table)
    return [normalize(sub(br[i], add(*(mul(C(d, a, b), basis[d][i]) for d in range(len(basis))))))
            for i in range(len(br))]


def _numeric_coefficients(br: VectorField, basis: KillingBasis, table: SymbolTable, fixed: dict,
                          rng: np.random.Generator, points: int = 8) -> np.ndarray:
    """Stack [X_A, X_B]^i = c^D xi_D^i over several points and solve for the constants c."""
    exprs = list(br.components) + [x for f in basis.xi for x in f.components]
    symbols = sorted(set().union(*(atoms(e) for e in exprs)), key=lambda s: s.sort_key())
    n_comp = len(br)
    for _ in range(20):
        env = sample_points(symbols, table, 4 * points, rng, fixed=fixed)
        vals = [evaluate_batch(e, env, 4 * points) for e in exprs]
        bad = np.zeros(4 * points, dtype=bool)
        for v in vals:
            bad |= v.bad
        good = np.flatnonzero(~bad)[:points]
        if good.size < points:
            continue
        rhs = np.concatenate([vals[i].values[good] for i in range(n_comp)])
        M = np.zeros((n_comp * points, len(basis)))
        for d in range(len(basis)):
            M[:, d] = np.concatenate([vals[n_comp * (d + 1) + i].values[good] for i in range(n_comp)])
        c, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        resid = np.abs(M @ c - rhs).max()
        size = 1.0 + np.abs(rhs).max() + np.abs(M).max()
        if resid > 1e-9 * size:
            raise NotClosed("commutator is not a constant-coefficient combination of the basis",
                            residual=resid)
        if np.linalg.matrix_rank(M, tol=1e-9 * size) < len(basis):
            raise NonConstantCoefficients("basis fields are linearly dependent over the constants")
        return c
    raise NotClosed("no admissible sample points for structure-constant recovery")


def _snap(x: float) -> Fraction | None:
    f = Fraction(x).limit_denominator(1000)
    return f if abs(float(f) - x) <= 1e-9 * (1 + abs(x)) else None


def _simplest_form(e: Expr, table: SymbolTable, hint: Expr | None) -> Expr:
    """Pick a short coordinate-free representative of a constant expression."""
    candidates = []
    if hint is not None:
        candidates.append(hint)
    coord_atoms = [a for a in atoms(e) if isinstance(a, Coord)]
    for values in itertools.product((0, 1), repeat=len(coord_atoms)):
        try:
            candidates.append(normalize(substitute(e, {a: Const(v) for a, v in zip(coord_atoms, values)})))
        except ZeroDivisionError:
            continue
    candidates.sort(key=lambda c: len(render(c)))
    for cand in candidates:
        if any(isinstance(a, Coord) for a in atoms(cand)):
            continue
        try:
            if zero_test(sub(cand, e), table).zero:
                return cand
        except Exception:
            continue
    return e


def recover_structure_constants(basis: KillingBasis, table: SymbolTable,
                                hints: StructureConstants | None = None) -> StructureConstants:
    """Find constants with [X_A, X_B] = C^D_AB X_D, then certify them symbolically.

    Constants that depend on parameters are derived through the omega split
    b^alpha = C^alpha + C^4 omega^alpha of the bracket in the independent frame.
    `hints` (e.g. a printed table) only influence how an entry is written, never its value.
    """
    rng = current_rng()
    n = len(basis)
    all_atoms = set()
    for f in basis.xi:
        for x in f.components:
            all_atoms |= atoms(x)
    params = [a for a in all_atoms if isinstance(a, Param)]
    combos = finite_combinations(params, table)
    lam = None
    om = None
    entries: dict[tuple[int, int, int], Expr] = {}
    for a in range(n):
        for b in range(a + 1, n):
            br = commutator(basis[a], basis[b], table)
            draws = []
            for k in range(max(3, len(combos))):
                fixed = dict(combos[k % len(combos)])
                for p in params:
                    if p not in fixed:
                        fixed[p] = float(table.parameters[p.name].sample(rng, 1)[0])
                draws.append(_numeric_coefficients(br, basis, table, fixed, rng))
            draws = np.array(draws)
            spread = np.abs(draws - draws[0]).max()
            snapped = [_snap(x) for x in draws[0]]
            if spread <= 1e-9 * (1 + np.abs(draws).max()) and all(s is not None for s in snapped):
                coeffs = [Const(s) for s in snapped]
            else:
                if lam is None:
                    lam = lambda_matrix(basis, table)
                    om = omega(basis, lam, table)
                coeffs = _symbolic_coefficients(br, lam, om, basis, table)
                coeffs = [_simplest_form(c, table, hints(d, a, b) if hints else None)
                          for d, c in enumerate(coeffs)]
            for d in range(n):
                entries[(d, a, b)] = coeffs[d]
    C = StructureConstants.from_entries(entries, n)
    for a in range(n):
        for b in range(a + 1, n):
            for i, r in enumerate(structure_residual(basis, C, a, b, table)):
                res = zero_test(r, table)
                if not res.zero:
                    raise NotClosed(f"[X{a + 1}, X{b + 1}] component {i} does not match the recovered constants",
                                    witness=res.witness)
    for idx, r in C.jacobi_residuals():
        res = zero_test(r, table)
        if not res.zero:
            raise CertificationFailed(f"Jacobi identity fails for indices {idx}", witness=res.witness)
    return C


def _symbolic_coefficients(br: VectorField, lam, om, basis: KillingBasis, table: SymbolTable) -> list[Expr]:
    orbit = [br[i] for i in ORBIT]
    bvec = [normalize(add(*(mul(orbit[k], lam[k][al]) for k in range(3)))) for al in range(3)]
    c4 = None
    for al in range(3):
        for coord in table.coordinates:
            dw = normalize(differentiate(om[al], coord))
            if is_const(dw, 0) or zero_test(dw, table).zero:
                continue
            c4 = normalize(div(differentiate(bvec[al], coord), dw))
            break
        if c4 is not None:
            break
    if c4 is None:
        raise NonConstantCoefficients("omega is constant: the dependent operator is a constant combination")
    coeffs = [normalize(sub(bvec[al], mul(c4, om[al]))) for al in range(3)] + [c4]
    for c in coeffs:
        for coord in table.coordinates:
            res = zero_test(differentiate(c, coord), table)
            if not res.zero:
                raise NonConstantCoefficients("bracket coefficients vary from point to point",
                                              witness=res.witness)
    return coeffs


def lambda_matrix(basis: KillingBasis, table: SymbolTable) -> list[list[Expr]]:
    """Inverse of the independent block; entry [beta][alpha] pairs orbit coordinate beta with operator alpha."""
    B = basis.block()
    d = linalg.det(B)
    if is_const(d, 0) or zero_test(d, table).zero:
        raise DegenerateBlock("independent 3x3 block of the Killing basis is singular")
    lam = linalg.inverse(B, d)
    for prod in (linalg.matmul(B, lam), linalg.matmul(lam, B)):
        for i in range(3):
            for j in range(3):
                res = zero_test(sub(prod[i][j], 1 if i == j else 0), table)
                if not res.zero:
                    raise CertificationFailed(f"lambda certification failed at ({i},{j})", witness=res.witness)
    return lam


def omega(basis: KillingBasis, lam, table: SymbolTable) -> list[Expr]:
    """Coefficients with X_4 = omega^alpha X_alpha, checked on all four components."""
    x4 = basis[basis.dependent]
    om = [normalize(add(*(mul(x4[ORBIT[b]], lam[b][al]) for b in range(3)))) for al in range(3)]
    for i in range(len(x4)):
        r = sub(x4[i], add(*(mul(om[al], basis[a][i]) for al, a in enumerate(basis.independent))))
        res = zero_test(normalize(r), table)
        if not res.zero:
            raise InconsistentDependentOperator(f"X{basis.dependent + 1} is not in the span of the independent operators (component {i})",
                                                witness=res.witness)
    return om


def c_tilde(C: StructureConstants, om: Sequence[Expr]) -> list[list[list[Expr]]]:
    """ct[gamma][A][B] = C^gamma_AB + omega^gamma C^4_AB for gamma in the independent block."""
    n = C.n
    return [[[normalize(add(C(g, a, b), mul(om[g], C(3, a, b)))) for b in range(n)] for a in range(n)]
            for g in range(3)]


@dataclass
class ReductionFrame:
    lam: list[list[Expr]]
    omega: list[Expr]
    c_tilde: list[list[list[Expr]]]


def reduction_frame(basis: KillingBasis, C: StructureConstants, table: SymbolTable) -> ReductionFrame:
    lam = lambda_matrix(basis, table)
    om = omega(basis, lam, table)
    return ReductionFrame(lam, om, c_tilde(C, om))


def lambda_identity_residuals(basis: KillingBasis, frame: ReductionFrame, table: SymbolTable) -> list[Expr]:
    """xi^rho_{alpha,sigma} lambda^gamma_rho + lambda^gamma_{sigma|alpha} + lambda^rho_sigma Ct^gamma_{alpha rho}."""
    lam, ct = frame.lam, frame.c_tilde
    coords = table.coordinates
    out = []
    for al in range(3):
        X = basis[basis.independent[al]]
        for s in range(3):
            for g in range(3):
                terms = [mul(differentiate(X[ORBIT[r]], coords[ORBIT[s]]), lam[r][g]) for r in range(3)]
                terms.append(X.apply(lam[s][g], table))
                terms += [mul(lam[s][r], ct[g][al][basis.independent[r]]) for r in range(3)]
                out.append(normalize(add(*terms)))
    return out


def omega_identity_residuals(basis: KillingBasis, frame: ReductionFrame, table: SymbolTable) -> list[Expr]:
    """omega^gamma_{|alpha} - Ct^gamma_{alpha 4} - omega^beta Ct^gamma_{beta alpha}."""
    om, ct = frame.omega, frame.c_tilde
    dep = basis.dependent
    out = []
    for al in range(3):
        a = basis.independent[al]
        for g in range(3):
            terms = [basis[a].apply(om[g], table), neg(ct[g][a][dep])]
            terms += [neg(mul(om[b], ct[g][basis.independent[b]][a])) for b in range(3)]
            out.append(normalize(add(*terms)))
    return out
