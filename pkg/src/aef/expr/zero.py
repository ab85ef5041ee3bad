"""Probabilistic identity testing by evaluation at random admissible points.

One-sided: a `False` verdict comes with a concrete witness point, a `True`
verdict means every sampled point agreed with zero to within
`tol * (1 + scale)`, where `scale` is the largest intermediate magnitude seen
while evaluating that point.
"""
from __future__ import annotations

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np

from ..errors import SamplingExhausted
from .evaluate import evaluate_batch
from .nodes import Const, Coord, Expr, Func, Param, atoms
from .symbols import DEFAULT_DOMAIN, Domain, SymbolTable


@dataclass(frozen=True)
class ZeroTestConfig:
    trials: int = 24
    tol: float = 1e-9
    delta_den: float = 1e-6
    max_rounds: int = 40
    seed: int = 0


_local = threading.local()
_DEFAULT_TABLE = SymbolTable()


def current_config() -> ZeroTestConfig:
    cfg = getattr(_local, "config", None)
    if cfg is None:
        cfg = _local.config = ZeroTestConfig()
    return cfg


def current_rng() -> np.random.Generator:
    rng = getattr(_local, "rng", None)
    if rng is None:
        rng = _local.rng = np.random.default_rng(current_config().seed)
    return rng


def configure(**changes) -> ZeroTestConfig:
    """Replace this thread's settings; passing `seed` also restarts the random stream."""
    cfg = replace(current_config(), **changes)
    _local.config = cfg
    if "seed" in changes:
        _local.rng = np.random.default_rng(cfg.seed)
    return cfg


def set_seed(seed: int) -> None:
    configure(seed=seed)


@contextmanager
def zero_test_settings(**changes):
    old_cfg = current_config()
    old_rng = getattr(_local, "rng", None)
    configure(**changes)
    try:
        yield current_config()
    finally:
        _local.config = old_cfg
        _local.rng = old_rng


@dataclass
class ZeroTestResult:
    zero: bool
    witness: dict | None = None
    value: float | None = None
    samples: int = 0

    def __bool__(self) -> bool:
        return self.zero


def _domain(atom: Expr, table: SymbolTable) -> Domain:
    if isinstance(atom, Coord):
        return table.domain_of(atom.name)
    if isinstance(atom, Param):
        return table.parameters.get(atom.name, DEFAULT_DOMAIN)
    return table.function_domain


def _label(atom: Expr) -> str:
    return atom.label if isinstance(atom, Func) else atom.name


def sample_points(symbols, table: SymbolTable, n: int, rng: np.random.Generator,
                  fixed: dict | None = None) -> dict:
    """Independent draws for every atom in `symbols`; `fixed` pins some atoms to scalars."""
    env = {}
    for a in symbols:
        if fixed and a in fixed:
            env[a] = np.full(n, float(fixed[a]))
        else:
            env[a] = _domain(a, table).sample(rng, n)
    return env


def finite_combinations(symbols, table: SymbolTable) -> list[dict]:
    """All assignments of the finite-set parameters present in `symbols`."""
    finite = sorted((a for a in symbols if isinstance(a, Param) and _domain(a, table).finite),
                    key=lambda a: a.name)
    if not finite:
        return [{}]
    choices = [_domain(a, table).values for a in finite]
    return [dict(zip(finite, combo)) for combo in itertools.product(*choices)]


def zero_test(e: Expr, table: SymbolTable | None = None, trials: int | None = None,
              tol: float | None = None, rng: np.random.Generator | None = None) -> ZeroTestResult:
    cfg = current_config()
    trials = cfg.trials if trials is None else trials
    tol = cfg.tol if tol is None else tol
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if isinstance(e, Const):
        return ZeroTestResult(e.value == 0, None if e.value == 0 else {}, float(e.value), 0)
    table = table or _DEFAULT_TABLE
    rng = rng or current_rng()
    symbols = sorted(atoms(e), key=lambda a: a.sort_key())
    total = 0
    for combo in finite_combinations(symbols, table):
        need = trials
        rounds = 0
        while need > 0:
            rounds += 1
            if rounds > cfg.max_rounds:
                raise SamplingExhausted(
                    f"could not find {trials} admissible sample points (expression singular on the sampled region?)",
                    expression=str(e)[:200])
            n = max(2 * need, 8)
            env = sample_points(symbols, table, n, rng, fixed=combo)
            res = evaluate_batch(e, env, n, cfg.delta_den)
            good = np.flatnonzero(~res.bad)[:need]
            if good.size == 0:
                continue
            vals = res.values[good]
            limit = tol * (1.0 + res.scale[good])
            failing = np.flatnonzero(np.abs(vals) > limit)
            if failing.size:
                k = good[failing[0]]
                witness = {_label(a): float(env[a][k]) for a in symbols}
                return ZeroTestResult(False, witness, float(res.values[k]), total + int(failing[0]) + 1)
            need -= good.size
            total += good.size
    return ZeroTestResult(True, None, 0.0, total)


def is_zero(e: Expr, table: SymbolTable | None = None, trials: int | None = None,
            tol: float | None = None) -> bool:
    return zero_test(e, table, trials, tol).zero


def find_witness(e: Expr, table: SymbolTable | None = None) -> dict | None:
    res = zero_test(e, table)
    return None if res.zero else res.witness
