"""Symbol tables: which names are coordinates, parameters or opaque functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .nodes import Coord, Func, Param

STANDARD_COORDINATES = ("u0", "u1", "u2", "u3")


@dataclass(frozen=True)
class Domain:
    """Sampling set: a union of closed intervals, or a finite set of values."""

    intervals: tuple[tuple[float, float], ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if bool(self.intervals) == bool(self.values):
            raise ValueError("a domain needs either intervals or values, not both")
        for lo, hi in self.intervals:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    @property
    def finite(self) -> bool:
        return bool(self.values)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.finite:
            return rng.choice(np.asarray(self.values, dtype=float), size=n)
        lo = np.array([a for a, _ in self.intervals])
        hi = np.array([b for _, b in self.intervals])
        widths = hi - lo
        which = rng.choice(len(widths), size=n, p=widths / widths.sum())
        return lo[which] + rng.random(n) * widths[which]

    def contains(self, x: float) -> bool:
        if self.finite:
            return any(x == v for v in self.values)
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def to_json(self) -> dict:
        if self.finite:
            return {"values": [_plain(v) for v in self.values]}
        return {"intervals": [[lo, hi] for lo, hi in self.intervals]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Domain":
        if "values" in data:
            return cls(values=tuple(float(v) for v in data["values"]))
        return cls(intervals=tuple((float(a), float(b)) for a, b in data["intervals"]))


def _plain(v: float):
    return int(v) if float(v).is_integer() else v


DEFAULT_DOMAIN = Domain(intervals=((-2.0, -0.1), (0.1, 2.0)))
SIGNS = Domain(values=(-1.0, 1.0))


@dataclass(frozen=True)
class SymbolTable:
    coordinates: tuple[str, ...] = STANDARD_COORDINATES
    parameters: Mapping[str, Domain] = field(default_factory=dict)
    functions: Mapping[str, str] = field(default_factory=dict)
    coordinate_domains: Mapping[str, Domain] = field(default_factory=dict)
    function_domain: Domain = DEFAULT_DOMAIN

    def __post_init__(self):
        names = list(self.coordinates) + list(self.parameters) + list(self.functions)
        if len(set(names)) != len(names):
            raise ValueError(f"symbol names clash: {names}")
        for name, var in self.functions.items():
            if var not in self.coordinates:
                raise ValueError(f"function {name} depends on undeclared coordinate {var}")
        for name in self.coordinate_domains:
            if name not in self.coordinates:
                raise ValueError(f"domain given for unknown coordinate {name}")

    def index(self, coord: str) -> int:
        return self.coordinates.index(coord)

    def coord(self, i: int | str) -> Coord:
        return Coord(self.coordinates[i] if isinstance(i, int) else i)

    def coords(self) -> tuple[Coord, ...]:
        return tuple(Coord(c) for c in self.coordinates)

    def param(self, name: str) -> Param:
        if name not in self.parameters:
            raise KeyError(name)
        return Param(name)

    def func(self, name: str, order: int = 0) -> Func:
        return Func(name, self.functions[name], order)

    def domain_of(self, coord: str) -> Domain:
        return self.coordinate_domains.get(coord, DEFAULT_DOMAIN)

    def extended(self, functions: Mapping[str, str] | None = None,
                 parameters: Mapping[str, Domain] | None = None) -> "SymbolTable":
        return SymbolTable(
            coordinates=self.coordinates,
            parameters={**self.parameters, **(parameters or {})},
            functions={**self.functions, **(functions or {})},
            coordinate_domains=dict(self.coordinate_domains),
            function_domain=self.function_domain,
        )

    def fresh_function_names(self, count: int, var: str) -> list[str]:
        """Names for free functions of `var` that don't clash with existing symbols."""
        taken = set(self.coordinates) | set(self.parameters)
        preferred = ["a0", "b0", "c0", "d0"]
        out = []
        for name in preferred + [f"f{k}" for k in range(1, 100)]:
            if len(out) == count:
                break
            if name in taken:
                continue
            if name in self.functions and self.functions[name] != var:
                continue
            out.append(name)
        return out
