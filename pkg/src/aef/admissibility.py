"""Admissible potentials: constraint matrices, null spaces, the compatibility reduction,
and direct checks (Lie-derivative admissibility, closure, Poisson brackets).

Nonholonomic components are 𝐀_alpha = xi_alpha^i A_i for the independent operators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CertificationFailed, NonTermination, RankInstability
from .expr import (ONE, ZERO, Expr, Func, SymbolTable, add, atoms, differentiate, div,
                   evaluate_batch, is_const, mul, neg, normalize, power, render, sample_points, sub,
                   substitute_function, tidy, zero_test)
from .expr import linalg
from .expr.zero import current_rng, finite_combinations
from .geometry import PotentialCandidate, VectorField, faraday, killing_residual
from .lie import ORBIT, KillingBasis, ReductionFrame, StructureConstants, commutator

Matrix = list[list[Expr]]


def _vanishes(e: Expr, table: SymbolTable) -> bool:
    return is_const(e, 0) or zero_test(e, table).zero


def _prune(m: Matrix, table: SymbolTable) -> Matrix:
    """Replace entries that vanish identically by a literal zero so later divisions stay regular."""
    return [[ZERO if _vanishes(x, table) else tidy(x) for x in row] for row in m]


# ---------------------------------------------------------------- reports

@dataclass
class ResidualEntry:
    label: str
    passed: bool
    residual: Expr
    witness: dict | None = None
    value: float | None = None


@dataclass
class ResidualReport:
    entries: list[ResidualEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[ResidualEntry]:
        return [e for e in self.entries if not e.passed]

    def add(self, label: str, residual: Expr, table: SymbolTable) -> None:
        residual = normalize(residual)
        if is_const(residual, 0):
            self.entries.append(ResidualEntry(label, True, residual))
            return
        res = zero_test(residual, table)
        self.entries.append(ResidualEntry(label, res.zero, residual, res.witness, res.value))


def residual_report(items, table: SymbolTable) -> ResidualReport:
    rep = ResidualReport()
    for label, r in items:
        rep.add(label, r, table)
    return rep


# ---------------------------------------------------------------- potentials

@dataclass(frozen=True)
class NonholonomicPotential:
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __getitem__(self, a: int) -> Expr:
        return self.components[a]

    def dependent(self, om: Sequence[Expr]) -> Expr:
        """Projection on the dependent operator: omega^alpha 𝐀_alpha."""
        return normalize(add(*(mul(w, a) for w, a in zip(om, self.components))))


def contract(xi: VectorField, A: Sequence[Expr]) -> Expr:
    return normalize(add(*(mul(x, a) for x, a in zip(xi.components, A) if not is_const(x, 0))))


def nonholonomic_from(A: PotentialCandidate, basis: KillingBasis) -> NonholonomicPotential:
    return NonholonomicPotential(tuple(contract(basis[a], A.A) for a in basis.independent))


def lie_derivative_covector(xi: VectorField, A: Sequence[Expr], table: SymbolTable) -> list[Expr]:
    """(L_xi A)_i = xi^j d_j A_i + A_j d_i xi^j."""
    coords = table.coordinates
    out = []
    for i, ci in enumerate(coords):
        terms = [xi.apply(A[i], table)]
        terms += [mul(A[j], differentiate(xi[j], ci)) for j in range(len(coords)) if not is_const(A[j], 0)]
        out.append(normalize(add(*terms)))
    return out


def check_admissibility(A: PotentialCandidate, basis: KillingBasis, table: SymbolTable) -> ResidualReport:
    """d_i(xi_A^j A_j) - xi_A^j F_ij for every operator A and coordinate i."""
    F = faraday(A, table)
    coords = table.coordinates
    rep = ResidualReport()
    for a in range(len(basis)):
        xi = basis[a]
        proj = contract(xi, A.A)
        for i, ci in enumerate(coords):
            terms = [differentiate(proj, ci)]
            terms += [neg(mul(xi[j], F[i][j])) for j in range(len(coords)) if not is_const(xi[j], 0)]
            rep.add(f"X{a + 1},{ci}", add(*terms), table)
    return rep


def gauge_equivalent(A: PotentialCandidate, B: PotentialCandidate, basis: KillingBasis,
                     table: SymbolTable) -> ResidualReport:
    """Same field strength and same projections on every operator."""
    FA, FB = faraday(A, table), faraday(B, table)
    items = []
    n = len(table.coordinates)
    for i in range(n):
        for j in range(i + 1, n):
            items.append((f"F[{i}][{j}]", sub(FA[i][j], FB[i][j])))
    for a in range(len(basis)):
        items.append((f"xi{a + 1}.A", sub(contract(basis[a], A.A), contract(basis[a], B.A))))
    return residual_report(items, table)


# ---------------------------------------------------------------- momentum-linear functions

@dataclass(frozen=True)
class LinearMomentumFunction:
    """xi^i p_i + gamma."""

    xi: VectorField
    gamma: Expr = ZERO

    @classmethod
    def from_field(cls, xi: VectorField, gamma: Expr = ZERO) -> "LinearMomentumFunction":
        return cls(xi, gamma)


def poisson_linear(f: LinearMomentumFunction, g: LinearMomentumFunction,
                   table: SymbolTable) -> LinearMomentumFunction:
    vec = commutator(f.xi, g.xi, table)
    scalar = normalize(sub(f.xi.apply(g.gamma, table), g.xi.apply(f.gamma, table)))
    return LinearMomentumFunction(vec, scalar)


def check_closure(basis: KillingBasis, C: StructureConstants, table: SymbolTable) -> dict[tuple[int, int], ResidualReport]:
    """[X_A, X_B]_P - C^D_AB X_D for each pair (1-based keys)."""
    X = [LinearMomentumFunction(x) for x in basis.xi]
    out = {}
    n = len(basis)
    for a in range(n):
        for b in range(a + 1, n):
            br = poisson_linear(X[a], X[b], table)
            items = []
            for i in range(len(table.coordinates)):
                rhs = add(*(mul(C(d, a, b), basis[d][i]) for d in range(n)))
                items.append((f"p{i}", sub(br.xi[i], rhs)))
            items.append(("scalar", br.gamma))
            out[(a + 1, b + 1)] = residual_report(items, table)
    return out


def check_bracket_decomposition(g_inv: Sequence[Sequence[Expr]], A: PotentialCandidate,
                                Y: LinearMomentumFunction, table: SymbolTable) -> dict[str, ResidualReport]:
    """Coefficients of {H, Y} for H = g^ij P_i P_j, P = p + A: quadratic and linear in p."""
    coords = table.coordinates
    n = len(coords)
    Q = killing_residual(g_inv, Y.xi, table)
    F = faraday(A, table)
    inner = []
    for i in range(n):
        terms = [mul(Y.xi[j], F[i][j]) for j in range(n) if not is_const(Y.xi[j], 0)]
        terms.append(differentiate(Y.gamma, coords[i]))
        inner.append(normalize(add(*terms)))
    lin = [normalize(mul(2, add(*(mul(g_inv[i][l], inner[i]) for i in range(n))))) for l in range(n)]
    quad = residual_report(((f"{i}{j}", Q[i][j]) for i in range(n) for j in range(i, n)), table)
    return {"quadratic": quad, "linear": residual_report(((f"p{l}", lin[l]) for l in range(n)), table)}


# ---------------------------------------------------------------- constraint matrices

def w0_matrix(frame: ReductionFrame, basis: KillingBasis, table: SymbolTable,
              essential: bool = True) -> Matrix:
    """Rows Ct^gamma_{alpha 4} + omega^beta Ct^gamma_{beta alpha}; optional extra rows d_i omega^gamma
    for the coordinates outside the orbit."""
    ct, om = frame.c_tilde, frame.omega
    ind, dep = basis.independent, basis.dependent
    rows = []
    for al in range(3):
        a = ind[al]
        rows.append([normalize(add(ct[g][a][dep], *(mul(om[b], ct[g][ind[b]][a]) for b in range(3))))
                     for g in range(3)])
    if essential:
        for i, c in enumerate(table.coordinates):
            if i not in ORBIT:
                rows.append([normalize(differentiate(w, c)) for w in om])
    return rows


def _numeric_ranks(W: Matrix, table: SymbolTable, points: int = 6) -> list[int]:
    exprs = [x for row in W for x in row]
    symbols = sorted(set().union(set(), *(atoms(e) for e in exprs)), key=lambda s: s.sort_key())
    rng = current_rng()
    ranks = []
    rows, cols = len(W), len(W[0]) if W else 0
    for combo in finite_combinations(symbols, table):
        got = 0
        for _ in range(20):
            env = sample_points(symbols, table, 4 * points, rng, fixed=combo)
            vals = [evaluate_batch(e, env, 4 * points) for e in exprs]
            bad = np.zeros(4 * points, dtype=bool)
            for v in vals:
                bad |= v.bad
            for k in np.flatnonzero(~bad):
                M = np.array([v.values[k] for v in vals]).reshape(rows, cols)
                scale = 1.0 + max(v.scale[k] for v in vals)
                ranks.append(int(np.linalg.matrix_rank(M, tol=1e-8 * scale)) if M.size else 0)
                got += 1
                if got >= points:
                    break
            if got >= points:
                break
        if got < points:
            raise RankInstability("not enough regular sample points to determine the rank")
    return ranks


@dataclass
class NullSpace:
    """Solutions 𝐀 = N f: N has identity rows at `free` and theta rows at the pivots."""

    N: Matrix
    free: tuple[int, ...]
    pivots: tuple[int, ...]
    rank: int

    @property
    def theta(self) -> dict[int, list[Expr]]:
        return {p: self.N[p] for p in self.pivots}


def null_space(W: Matrix, table: SymbolTable, ncols: int | None = None) -> NullSpace:
    cols = ncols if ncols is not None else (len(W[0]) if W else 0)
    W = [row for row in W if not all(is_const(x, 0) for x in row)]
    ranks = _numeric_ranks(W, table) if W else [0]
    if len(set(ranks)) != 1:
        raise RankInstability(f"rank varies across sample points: {sorted(set(ranks))}")
    r = ranks[0]
    if r == 0:
        return NullSpace(linalg.identity(cols), tuple(range(cols)), (), 0)
    chosen = None
    for pcols in itertools.combinations(range(cols), r):
        for prows in itertools.combinations(range(len(W)), r):
            block = [[W[i][j] for j in pcols] for i in prows]
            d = linalg.det(block)
            if not _vanishes(d, table):
                chosen = (pcols, prows, block, d)
                break
        if chosen:
            break
    if chosen is None:
        raise RankInstability(f"no nonzero {r}x{r} minor found although the sampled rank is {r}")
    pcols, prows, block, d = chosen
    free = tuple(j for j in range(cols) if j not in pcols)
    inv = linalg.inverse(block, d)
    Z = [[W[i][j] for j in free] for i in prows]
    theta = linalg.matmul(inv, Z)
    N = [[ZERO] * len(free) for _ in range(cols)]
    for k, j in enumerate(free):
        N[j][k] = ONE
    for k, p in enumerate(pcols):
        N[p] = [normalize(neg(x)) for x in theta[k]]
    N = _prune(N, table)
    prod = linalg.matmul(W, N)
    for i, row in enumerate(prod):
        for j, x in enumerate(row):
            res = zero_test(x, table) if not is_const(x, 0) else None
            if res is not None and not res.zero:
                raise CertificationFailed(f"null space certification failed at ({i},{j})", witness=res.witness)
    return NullSpace(N, free, tuple(pcols), r)


# ---------------------------------------------------------------- reduction loop

@dataclass
class ReductionState:
    step: int
    W: Matrix
    N: Matrix
    free: tuple[int, ...]
    status: str = "Running"  # Running | SolvedFreeComponents | OnlyZeroSolution
    history: list[dict] = field(default_factory=list)

    @property
    def theta(self) -> dict[int, list[Expr]]:
        return {i: self.N[i] for i in range(len(self.N)) if i not in self.free}


def _ct_alpha(frame: ReductionFrame, basis: KillingBasis, al: int) -> Matrix:
    """(Ct_alpha)[beta][gamma] = Ct^gamma_{alpha beta} over the independent block."""
    a = basis.independent[al]
    return [[frame.c_tilde[g][a][basis.independent[b]] for g in range(3)] for b in range(3)]


def _apply_matrix(X: VectorField, M: Matrix, table: SymbolTable) -> Matrix:
    return [[X.apply(x, table) for x in row] for row in M]


def _mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[normalize(sub(x, y)) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[normalize(add(x, y)) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _scale(c: Expr, m: Matrix) -> Matrix:
    return [[normalize(mul(c, x)) for x in row] for row in m]


def transport_matrices(N: Matrix, free: Sequence[int], frame: ReductionFrame,
                       basis: KillingBasis) -> list[Matrix]:
    """M_alpha with X_alpha f = M_alpha f for the free components f."""
    out = []
    for al in range(3):
        CN = linalg.matmul(_ct_alpha(frame, basis, al), N)
        out.append([CN[j] for j in free])
    return out


def constraint_matrix(N: Matrix, free: Sequence[int], frame: ReductionFrame, basis: KillingBasis,
                      table: SymbolTable) -> Matrix:
    """Algebraic conditions on f left over after substituting 𝐀 = N f into the transport equations."""
    M = transport_matrices(N, free, frame, basis)
    X = [basis[a] for a in basis.independent]
    rows: list[list[Expr]] = []
    for al in range(3):
        lhs = _mat_add(_apply_matrix(X[al], N, table), linalg.matmul(N, M[al]))
        rows += _mat_sub(lhs, linalg.matmul(_ct_alpha(frame, basis, al), N))
    for al in range(3):
        for be in range(al + 1, 3):
            r = _mat_sub(_apply_matrix(X[al], M[be], table), _apply_matrix(X[be], M[al], table))
            r = _mat_add(r, _mat_sub(linalg.matmul(M[be], M[al]), linalg.matmul(M[al], M[be])))
            for g in range(3):
                c = frame.c_tilde[g][basis.independent[al]][basis.independent[be]]
                if not is_const(c, 0):
                    r = _mat_sub(r, _scale(c, M[g]))
            rows += r
    return rows


def reduce(frame: ReductionFrame, basis: KillingBasis, initial: NullSpace, table: SymbolTable,
           W0: Matrix | None = None, max_steps: int = 6) -> ReductionState:
    state = ReductionState(0, W0 or [], initial.N, initial.free)
    state.history.append({"step": 0, "free": list(initial.free), "rank": initial.rank})
    if not state.free:
        state.status = "OnlyZeroSolution"
        return state
    while True:
        if state.step >= max_steps:
            raise NonTermination(f"reduction did not settle after {max_steps} steps")
        K = constraint_matrix(state.N, state.free, frame, basis, table)
        K = [row for row in _prune(K, table) if not all(is_const(x, 0) for x in row)]
        state.step += 1
        state.W = K
        if not K:
            state.status = "SolvedFreeComponents"
            state.history.append({"step": state.step, "free": list(state.free), "rank": 0})
            return state
        ns = null_space(K, table, ncols=len(state.free))
        state.N = _prune(linalg.matmul(state.N, ns.N), table)
        state.free = tuple(state.free[j] for j in ns.free)
        state.history.append({"step": state.step, "free": list(state.free), "rank": ns.rank})
        if not state.free:
            state.status = "OnlyZeroSolution"
            return state


# ---------------------------------------------------------------- residual system

@dataclass
class ResidualSolution:
    status: str  # Constant | Proportional | Empty | Unsolved
    f: list[Expr]
    functions: list[str]
    mu: list[Matrix]
    note: str = ""


def residual_system(state: ReductionState, frame: ReductionFrame, basis: KillingBasis,
                    table: SymbolTable) -> ResidualSolution:
    """Solve d_beta f = mu_beta f on the orbit for the free components f."""
    k = len(state.free)
    if k == 0:
        return ResidualSolution("Empty", [], [], [], "no free components")
    M = transport_matrices(state.N, state.free, frame, basis)
    lam = frame.lam
    mu = []
    for b in range(3):
        m = [[ZERO] * k for _ in range(k)]
        for al in range(3):
            if is_const(lam[b][al], 0):
                continue
            m = _mat_add(m, _scale(lam[b][al], M[al]))
        mu.append(m)
    essential = [c for i, c in enumerate(table.coordinates) if i not in ORBIT]
    var = essential[0] if essential else table.coordinates[0]
    orbit_ops_tangent = all(_vanishes(basis[a][i], table)
                            for a in basis.independent for i in range(len(table.coordinates)) if i not in ORBIT)
    if not orbit_ops_tangent:
        return ResidualSolution("Unsolved", [], [], mu, "operators have components off the orbit")
    names = table.fresh_function_names(k, var)
    if all(_vanishes(x, table) for m in mu for row in m for x in row):
        return ResidualSolution("Constant", [Func(n, var) for n in names], names, mu,
                                "all orbit derivatives vanish")
    if k == 1:
        coords = [table.coordinates[i] for i in ORBIT]
        for phi in _candidates(state.N, lam):
            ok = True
            for b in range(3):
                r = normalize(sub(differentiate(phi, coords[b]), mul(mu[b][0][0], phi)))
                if not _vanishes(r, table):
                    ok = False
                    break
            if ok:
                return ResidualSolution("Proportional", [normalize(mul(Func(names[0], var), phi))], names, mu,
                                        f"f = {names[0]}({var}) * {render(phi)}")
    return ResidualSolution("Unsolved", [], [], mu, "no constancy or proportionality pattern found")


def _candidates(N: Matrix, lam: Matrix) -> list[Expr]:
    col = [row[0] for row in N]
    hol = [normalize(add(*(mul(lam[b][a], col[a]) for a in range(3)))) for b in range(3)]
    out = [ONE]
    for x in col + hol:
        if is_const(x, 0):
            continue
        for c in (normalize(power(x, -1)), x):
            if c not in out:
                out.append(c)
    return out


# ---------------------------------------------------------------- holonomic reconstruction

def holonomic_potential(nh: NonholonomicPotential, basis: KillingBasis, frame: ReductionFrame,
                        table: SymbolTable, A0: Expr = ZERO) -> PotentialCandidate:
    lam = frame.lam
    A = [ZERO] * len(table.coordinates)
    for i in range(len(table.coordinates)):
        if i not in ORBIT:
            A[i] = A0
    for b, i in enumerate(ORBIT):
        A[i] = normalize(add(*(mul(lam[b][al], nh[al]) for al in range(3))))
    for al, a in enumerate(basis.independent):
        res = zero_test(sub(contract(basis[a], A), nh[al]), table)
        if not res.zero:
            raise CertificationFailed(f"holonomic potential does not reproduce component {al + 1}",
                                      witness=res.witness)
    return PotentialCandidate(tuple(A), "A0 = 0 (essential component removed by gauge)" if is_const(A0, 0) else "")


# ---------------------------------------------------------------- full pipeline

@dataclass
class PipelineResult:
    W0: Matrix
    initial: NullSpace
    state: ReductionState
    solution: ResidualSolution
    nonholonomic: NonholonomicPotential | None
    potential: PotentialCandidate | None
    admissibility: ResidualReport | None
    outcome: str  # PotentialFound | ZeroField | NoField | Unsolved


def classify(frame: ReductionFrame, basis: KillingBasis, table: SymbolTable) -> PipelineResult:
    W0 = w0_matrix(frame, basis, table)
    initial = null_space(W0, table, ncols=3)
    state = reduce(frame, basis, initial, table, W0=W0)
    if state.status == "OnlyZeroSolution":
        sol = ResidualSolution("Empty", [], [], [], "no free components")
        zero = PotentialCandidate.zero(len(table.coordinates), "only the zero solution survives")
        return PipelineResult(W0, initial, state, sol, NonholonomicPotential((ZERO,) * 3), zero, None, "NoField")
    sol = residual_system(state, frame, basis, table)
    if sol.status == "Unsolved":
        return PipelineResult(W0, initial, state, sol, None, None, None, "Unsolved")
    nh = NonholonomicPotential(tuple(normalize(add(*(mul(state.N[al][j], sol.f[j]) for j in range(len(sol.f)))))
                                     for al in range(3)))
    ptable = extend_with_functions(table, sol)
    A = holonomic_potential(nh, basis, frame, ptable)
    adm = check_admissibility(A, basis, ptable)
    F = faraday(A, ptable)
    flat = all(_vanishes(F[i][j], ptable) for i in range(len(F)) for j in range(i + 1, len(F)))
    return PipelineResult(W0, initial, state, sol, nh, A, adm, "ZeroField" if flat else "PotentialFound")


def extend_with_functions(table: SymbolTable, sol: ResidualSolution) -> SymbolTable:
    var = None
    for f in sol.f:
        for a in atoms(f):
            if isinstance(a, Func):
                var = a.var
    if not sol.functions or var is None:
        return table
    return table.extended(functions={n: var for n in sol.functions})


# ---------------------------------------------------------------- matching a reference potential

@dataclass
class PotentialMatch:
    matched: bool
    substitution: dict[str, Expr]
    potential: PotentialCandidate | None
    report: ResidualReport | None
    reason: str = ""


def match_potential(result: PipelineResult, reference: PotentialCandidate, basis: KillingBasis,
                    table: SymbolTable) -> PotentialMatch:
    """Choose the free functions so the pipeline potential reproduces `reference`, then test gauge equivalence.

    The free functions must come out depending on the essential coordinate only; otherwise
    the reference lies outside the family the pipeline produced.
    """
    if result.potential is None:
        return PotentialMatch(False, {}, None, None, "pipeline produced no potential")
    sol = result.solution
    ptable = extend_with_functions(table, sol)
    ref_nh = nonholonomic_from(reference, basis)
    subs: dict[str, Expr] = {}
    for j, name in enumerate(sol.functions):
        idx = result.state.free[j]
        phi = normalize(div(sol.f[j], Func(name, _func_var(sol.f[j], name))))
        kappa = normalize(div(ref_nh[idx], phi))
        for i in ORBIT:
            d = normalize(differentiate(kappa, table.coordinates[i]))
            if not _vanishes(d, ptable):
                return PotentialMatch(False, {}, None, None,
                                      f"reference component {idx + 1} is not of the form phi(u) * a(u0)")
        subs[name] = kappa
    A = result.potential.A
    out = []
    for x in A:
        for name, kappa in subs.items():
            x = substitute_function(x, name, kappa)
        out.append(normalize(x))
    cand = PotentialCandidate(tuple(out), "free functions fitted to the reference")
    rep = gauge_equivalent(cand, reference, basis, ptable)
    return PotentialMatch(rep.passed, subs, cand, rep, "" if rep.passed else "not gauge equivalent")


def _func_var(f: Expr, name: str) -> str:
    for a in atoms(f):
        if isinstance(a, Func) and a.name == name:
            return a.var
    raise ValueError(f"{name} does not occur in {f}")


# ---------------------------------------------------------------- identities

def compatibility_residuals(nh: NonholonomicPotential, basis: KillingBasis, C: StructureConstants,
                            frame: ReductionFrame, table: SymbolTable) -> list[tuple[str, Expr]]:
    """𝐀_{beta|alpha gamma} - 𝐀_{beta|gamma alpha} - C^s_{alpha beta} 𝐀_{s|gamma} + C^s_{gamma beta} 𝐀_{s|alpha},
    with s running over all four operators and the dependent projection omega.𝐀."""
    ind = basis.independent
    X = [basis[a] for a in ind]
    full = {a: nh[k] for k, a in enumerate(ind)}
    full[basis.dependent] = nh.dependent(frame.omega)
    first = {(s, g): X[g].apply(full[s], table) for s in full for g in range(3)}
    out = []
    for al, be, ga in itertools.product(range(3), repeat=3):
        if al >= ga:
            continue
        terms = [X[ga].apply(first[(ind[be], al)], table), neg(X[al].apply(first[(ind[be], ga)], table))]
        for s in full:
            c1 = C(s, ind[al], ind[be])
            c2 = C(s, ind[ga], ind[be])
            if not is_const(c1, 0):
                terms.append(neg(mul(c1, first[(s, ga)])))
            if not is_const(c2, 0):
                terms.append(mul(c2, first[(s, al)]))
        out.append((f"{al + 1}{be + 1}{ga + 1}", normalize(add(*terms))))
    return out


def annihilation_residuals(nh: NonholonomicPotential, frame: ReductionFrame,
                           table: SymbolTable) -> list[tuple[str, Expr]]:
    """d_i omega^gamma 𝐀_gamma for every coordinate."""
    return [(c, normalize(add(*(mul(differentiate(w, c), nh[g]) for g, w in enumerate(frame.omega)))))
            for c in table.coordinates]
