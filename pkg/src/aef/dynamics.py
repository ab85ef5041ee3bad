"""Numeric Hamiltonian flow of a charged test particle and drift of the conserved quantities.

H = g^ij (p_i + A_i)(p_j + A_j) in canonical momenta, X_A = xi_A^i p_i.  The metric,
potential, operators, det g and the adjugate of g are compiled once from the symbolic
forms, so g^-1 = adj(g)/det g stays accurate when g is badly conditioned; the
derivatives of g^-1 follow numerically from d(g^-1) = -g^-1 dg g^-1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BlowUp, MetricDegeneration, NoPotential
from .expr import Const, Coord, Expr, Func, Param, SymbolTable, atoms, differentiate, normalize, parse, render
from .expr import compile_exprs, linalg, substitute, substitute_function
from .geometry import PotentialCandidate

START_U = (0.1, 0.2, 0.3, 0.4)
START_P = (0.5, -0.3, 0.7, 0.2)
PREFERRED_PARAMS = {"c": 0.3}
METHODS = ("rk4", "rk4-adaptive")
# per-case numeric choices; with c = 0.3 the orbit from START leaves the chart of 3.2.3
# near t = 3.1 (u3 -> -inf while g33 -> 0), with c = -0.8 it stays regular up to t = 10
CASE_PARAMETERS = {"3.2.3": {"c": -0.8}}
DEGENERACY = 1e-12


def default_parameters(table: SymbolTable) -> dict[str, float]:
    """+1 for sign choices when allowed, the only value of singleton sets, 0.3 (or the first interval's midpoint) otherwise."""
    out = {}
    for name, dom in sorted(table.parameters.items()):
        if dom.finite:
            out[name] = 1.0 if 1.0 in dom.values else float(dom.values[0])
        else:
            want = PREFERRED_PARAMS.get(name, 0.3)
            lo, hi = dom.intervals[0]
            out[name] = want if dom.contains(want) else 0.5 * (lo + hi)
    return out


def default_functions(table: SymbolTable) -> dict[str, str]:
    """a0 follows its variable (so the essential direction is exercised); every other free function is 1."""
    return {name: (var if name == "a0" else "1") for name, var in sorted(table.functions.items())}


def _specialize(e: Expr, params: Mapping[str, float], functions: Mapping[str, Expr]) -> Expr:
    for name, rep in functions.items():
        e = substitute_function(e, name, rep)
    mapping = {Param(k): Const(Fraction(v).limit_denominator(10**9)) for k, v in params.items()}
    return normalize(substitute(e, mapping))


@dataclass
class NumericCaseInstance:
    """A case with every parameter and free function fixed, compiled for fast evaluation."""

    case_id: str
    params: dict[str, float]
    functions: dict[str, str]
    g: list[list[Expr]]
    A: list[Expr]
    xi: list[list[Expr]]
    _metric: Callable = field(repr=False, default=None)
    _potential: Callable = field(repr=False, default=None)
    _xi: Callable = field(repr=False, default=None)
    _adj: Callable = field(repr=False, default=None)
    det_ref: float | None = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.A)

    @classmethod
    def build(cls, case_id: str, table: SymbolTable, g, xi, A: Sequence[Expr] | None,
              params: Mapping[str, float] | None = None, functions: Mapping[str, str] | None = None
              ) -> "NumericCaseInstance":
        n = len(table.coordinates)
        pv = default_parameters(table)
        for k, v in (params or {}).items():
            if k not in table.parameters:
                raise KeyError(f"unknown parameter {k!r}")
            if not table.parameters[k].contains(float(v)):
                raise ValueError(f"{k} = {v} lies outside its declared set")
            pv[k] = float(v)
        fv = default_functions(table)
        fv.update(functions or {})
        fexpr = {}
        for name, text in fv.items():
            fexpr[name] = parse(text, SymbolTable(coordinates=table.coordinates, parameters=table.parameters))
        spec = lambda e: _specialize(e, pv, fexpr)  # noqa: E731
        gs = [[spec(x) for x in row] for row in g]
        As = [spec(x) for x in (A if A is not None else [Const(0)] * n)]
        xs = [[spec(x) for x in v] for v in xi]
        for e in [x for row in gs for x in row] + As + [x for v in xs for x in v]:
            left = [a for a in atoms(e) if not isinstance(a, Coord)]
            if left:
                raise ValueError(f"no value given for {', '.join(sorted(render(a) for a in left))}")
        inst = cls(case_id, pv, {k: str(v) for k, v in fv.items()}, gs, As, xs)
        inst._compile(table)
        return inst

    def _compile(self, table: SymbolTable) -> None:
        coords = [Coord(c) for c in table.coordinates]
        n = len(coords)
        flat_g = [self.g[i][j] for i in range(n) for j in range(n)]
        dg = [normalize(differentiate(x, c.name)) for c in coords for x in flat_g]
        self._metric = compile_exprs(flat_g + dg, coords, "metric")
        dA = [normalize(differentiate(a, c.name)) for c in coords for a in self.A]
        self._potential = compile_exprs(self.A + dA, coords, "potential")
        self._xi = compile_exprs([x for v in self.xi for x in v], coords, "operators")
        adj = linalg.adjugate(self.g)
        self._adj = compile_exprs([linalg.det(self.g)] + [normalize(x) for row in adj for x in row], coords, "adjugate")

    # numeric pieces ------------------------------------------------------
    def metric(self, u) -> tuple[np.ndarray, np.ndarray]:
        n = self.dim
        vals = np.array(self._metric(*u), dtype=float)
        return vals[: n * n].reshape(n, n), vals[n * n:].reshape(n, n, n)

    def potential(self, u) -> tuple[np.ndarray, np.ndarray]:
        n = self.dim
        vals = np.array(self._potential(*u), dtype=float)
        return vals[:n], vals[n:].reshape(n, n)

    def operators(self, u) -> np.ndarray:
        return np.array(self._xi(*u), dtype=float).reshape(len(self.xi), self.dim)

    def _inverse(self, u) -> tuple[np.ndarray, np.ndarray]:
        n = self.dim
        g, dg = self.metric(u)
        vals = np.array(self._adj(*u), dtype=float)
        det, adj = float(vals[0]), vals[1:].reshape(n, n)
        if self.det_ref is None:
            # first point: scale-free test of |det g| against the Hadamard bound of its rows
            bound = float(np.prod(np.linalg.norm(g, axis=1)))
            degenerate = bound == 0.0 or abs(det) < DEGENERACY * bound
        else:
            # along a path: det g collapsing relative to its value at the start
            degenerate = abs(det) < DEGENERACY * self.det_ref
        if not np.isfinite(det) or degenerate:
            raise MetricDegeneration(f"metric determinant {det:.3e} at u = {list(map(float, u))}",
                                     u=[float(x) for x in u])
        gi = adj / det
        dgi = -np.einsum("ia,kab,bj->kij", gi, dg, gi)
        return gi, dgi

    def start(self, u) -> None:
        """Check the initial point and fix the reference determinant for the degeneracy monitor."""
        self.det_ref = None
        self._inverse(u)
        self.det_ref = abs(float(self._adj(*u)[0]))

    def rhs(self, state: np.ndarray) -> np.ndarray:
        n = self.dim
        u, p = state[:n], state[n:]
        gi, dgi = self._inverse(u)
        A, dA = self.potential(u)
        P = p + A
        udot = 2.0 * gi @ P
        pdot = -(np.einsum("kij,i,j->k", dgi, P, P) + 2.0 * dA @ (gi @ P))
        return np.concatenate([udot, pdot])

    def hamiltonian(self, state: np.ndarray) -> float:
        n = self.dim
        gi, _ = self._inverse(state[:n])
        A, _ = self.potential(state[:n])
        P = state[n:] + A
        return float(P @ gi @ P)

    def charges(self, state: np.ndarray) -> np.ndarray:
        n = self.dim
        return self.operators(state[:n]) @ state[n:]


def instantiate(case, potential: PotentialCandidate | None = None, free: bool = False,
                params: Mapping[str, float] | None = None, functions: Mapping[str, str] | None = None
                ) -> NumericCaseInstance:
    """Numeric instance of a catalog case; uses the printed potential unless one is given or `free`."""
    if free:
        A = None
    elif potential is not None:
        A = list(potential.A)
    elif case.printed_potential is not None:
        A = list(case.printed_potential.A)
    else:
        raise NoPotential(f"case {case.id} has no potential; use the free particle instead", case=case.id)
    table = case.table
    params = {**CASE_PARAMETERS.get(case.id, {}), **(params or {})}
    extra = {a.name: a.var for e in (A or []) for a in atoms(e) if isinstance(a, Func) and a.name not in table.functions}
    if extra:
        table = table.extended(functions=extra)
    return NumericCaseInstance.build(case.id, table, case.metric.g_cov, [v.components for v in case.killing.xi], A,
                                     params, functions)


# ---------------------------------------------------------------- integration

@dataclass
class Trajectory:
    case_id: str
    method: str
    dt: float
    t_end: float
    t: np.ndarray
    states: np.ndarray
    H: np.ndarray
    X: np.ndarray
    steps: int
    min_dt: float

    def drift(self, series: np.ndarray) -> float:
        return float(np.max(np.abs(series - series[0])) / (1.0 + abs(series[0])))

    @property
    def drifts(self) -> dict[str, float]:
        out = {"H": self.drift(self.H)}
        for a in range(self.X.shape[1]):
            out[f"X{a + 1}"] = self.drift(self.X[:, a])
        return out


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(inst: NumericCaseInstance, u0: Sequence[float] = START_U, p0: Sequence[float] = START_P,
              dt: float = 1e-3, t_end: float = 10.0, method: str = "rk4", bound: float = 1e8,
              local_tol: float = 1e-12, record_every: int = 1) -> Trajectory:
    """Canonical equations u' = dH/dp, p' = -dH/du with fixed-step RK4, or RK4 that halves the
    step wherever one step and two half steps disagree by more than `local_tol`."""
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    n = inst.dim
    y = np.concatenate([np.asarray(u0, float), np.asarray(p0, float)])
    if y.size != 2 * n:
        raise ValueError(f"initial state needs {n} coordinates and {n} momenta")
    inst.start(y[:n])
    ts, ys = [0.0], [y.copy()]
    t = 0.0
    steps = 0
    min_dt = dt
    nsteps = int(round(t_end / dt))
    f = inst.rhs
    for k in range(nsteps):
        if method == "rk4":
            y = _rk4(f, y, dt)
        else:
            y, used = _adaptive(f, y, dt, local_tol)
            min_dt = min(min_dt, used)
        steps += 1
        t = (k + 1) * dt
        norm = float(np.max(np.abs(y)))
        if not np.isfinite(norm) or norm > bound:
            raise BlowUp(f"state norm {norm:.3e} exceeds {bound:.1e} at t = {t:.6g}", t=t)
        if (k + 1) % record_every == 0 or k + 1 == nsteps:
            ts.append(t)
            ys.append(y.copy())
    states = np.array(ys)
    H = np.array([inst.hamiltonian(s) for s in states])
    X = np.array([inst.charges(s) for s in states])
    return Trajectory(inst.case_id, method, dt, t_end, np.array(ts), states, H, X, steps, min_dt)


def _adaptive(f, y, h, tol, depth: int = 0):
    full = _rk4(f, y, h)
    half = _rk4(f, _rk4(f, y, h / 2), h / 2)
    if depth >= 12 or np.max(np.abs(full - half)) <= tol * (1.0 + np.max(np.abs(y))):
        return half, h
    mid, used1 = _adaptive(f, y, h / 2, tol, depth + 1)
    end, used2 = _adaptive(f, mid, h / 2, tol, depth + 1)
    return end, min(used1, used2)


# ---------------------------------------------------------------- conservation

@dataclass(frozen=True)
class QuantityDrift:
    name: str
    drift: float
    passed: bool


@dataclass
class ConservationReport:
    case_id: str
    tol: float
    entries: list[QuantityDrift]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[QuantityDrift]:
        return [e for e in self.entries if not e.passed]

    def to_json(self) -> dict:
        return {"case": self.case_id, "tol": self.tol, "passed": self.passed,
                "drift": {e.name: e.drift for e in self.entries},
                "violated": [e.name for e in self.failures()]}


def conservation_report(traj: Trajectory, tol: float = 1e-8) -> ConservationReport:
    """max_t |Q(t) - Q(0)| / (1 + |Q(0)|) for H and each X_A."""
    if not (np.all(np.isfinite(traj.H)) and np.all(np.isfinite(traj.X))):
        raise BlowUp("trajectory contains non-finite values")
    entries = [QuantityDrift(k, v, v < tol) for k, v in traj.drifts.items()]
    return ConservationReport(traj.case_id, tol, entries)


def halving_ratio(inst: NumericCaseInstance, dt: float, t_end: float, quantity: str = "H",
                  **kw) -> tuple[float, float, float]:
    """Drift at dt and dt/2 and their ratio; about 16 when RK4 truncation error dominates."""
    a = integrate(inst, dt=dt, t_end=t_end, **kw).drifts[quantity]
    b = integrate(inst, dt=dt / 2, t_end=t_end, **kw).drifts[quantity]
    return a, b, (a / b if b > 0 else float("inf"))
