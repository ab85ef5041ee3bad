"""In-memory form of a catalog case and its (de)serialization."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from fractions import Fraction
from typing import Any, Mapping

import jsonschema

from ..errors import ParseError, SchemaError
from ..expr import (ZERO, Const, Coord, Expr, SymbolTable, differentiate, is_const, mul, normalize, parse, render,
                    substitute)
from ..expr.symbols import DEFAULT_DOMAIN, STANDARD_COORDINATES, Domain
from ..geometry import MetricSpec, PotentialCandidate, VectorField
from ..lie import KillingBasis, StructureConstants

SCHEMA_VERSION = "aef-case/1"
OUTCOMES = ("PotentialFound", "NoField", "ZeroField")
HALF = Const(Fraction(1, 2))


@lru_cache(maxsize=1)
def case_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema.json").read_text())


@dataclass(frozen=True)
class Flag:
    field: str
    note: str


@dataclass(frozen=True)
class GroupCase:
    id: str
    bianchi_label: str
    transitivity: str
    table: SymbolTable
    metric: MetricSpec
    killing: KillingBasis
    printed_C: StructureConstants
    printed_lambda: tuple | None = None
    printed_omega: tuple | None = None
    printed_W: tuple | None = None
    printed_potential: PotentialCandidate | None = None
    printed_nonholonomic: tuple | None = None
    printed_metric: str | None = None
    printed_operators: tuple[VectorField, ...] | None = None
    expected_outcome: str = "PotentialFound"
    flags: tuple[Flag, ...] = ()
    description: str = ""
    source: str | None = field(default=None, compare=False)

    def flagged(self, name: str) -> bool:
        return any(f.field == name for f in self.flags)

    def flag_notes(self, name: str) -> list[str]:
        return [f.note for f in self.flags if f.field == name]


# ---------------------------------------------------------------- reading

def _parse(text: str, table: SymbolTable, where: str) -> Expr:
    try:
        return parse(text, table)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc}", where=where) from exc


def _aux_table(table: SymbolTable, prefix: str) -> tuple[SymbolTable, list[str]]:
    extra = [f"{prefix}{c[1:] if c.startswith('u') else c}" for c in table.coordinates]
    aux = SymbolTable(coordinates=tuple(table.coordinates) + tuple(extra), parameters=table.parameters,
                      functions=table.functions, coordinate_domains=table.coordinate_domains,
                      function_domain=table.function_domain)
    return aux, extra


def read_quadratic_form(text: str, table: SymbolTable, where: str = "metric.ds2") -> list[list[Expr]]:
    """g_ij from a line element written with differentials du0..du3."""
    aux, diffs = _aux_table(table, "du")
    q = _parse(text, aux, where)
    n = len(diffs)
    first = [differentiate(q, d) for d in diffs]
    g = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = normalize(mul(differentiate(first[i], diffs[j]), HALF))
            g[i][j] = g[j][i] = v
    at_origin = normalize(substitute(q, {Coord(d): ZERO for d in diffs}))
    bad = not is_const(at_origin, 0)
    for i, j, k in itertools.combinations_with_replacement(range(n), 3):
        if not is_const(normalize(differentiate(g[i][j], diffs[k])), 0):
            bad = True
    if bad:
        raise SchemaError(f"{where}: not a quadratic form in the differentials {', '.join(diffs)}", where=where)
    return g


def read_operator(text: str, table: SymbolTable, where: str) -> VectorField:
    """Components xi^i from a momentum-linear expression in p0..p3."""
    aux, moms = _aux_table(table, "p")
    x = _parse(text, aux, where)
    comps = [normalize(differentiate(x, p)) for p in moms]
    at_origin = normalize(substitute(x, {Coord(p): ZERO for p in moms}))
    bad = not is_const(at_origin, 0)
    for c in comps:
        for p in moms:
            if not is_const(normalize(differentiate(c, p)), 0):
                bad = True
    if bad:
        raise SchemaError(f"{where}: operator is not linear and homogeneous in {', '.join(moms)}", where=where)
    return VectorField(tuple(comps))


def _operator(item, table: SymbolTable, where: str) -> VectorField:
    if isinstance(item, str):
        return read_operator(item, table, where)
    return VectorField(tuple(normalize(_parse(s, table, f"{where}[{i}]")) for i, s in enumerate(item)))


def _domain(data: Mapping) -> Domain:
    try:
        return Domain.from_json(data)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def case_from_dict(data: Mapping[str, Any], source: str | None = None) -> GroupCase:
    where = source or data.get("id", "<case>")
    try:
        jsonschema.validate(data, case_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where}: {exc.message} (at {path or 'top level'})", path=path) from exc
    sym = data["symbols"]
    try:
        table = SymbolTable(
            coordinates=tuple(sym.get("coordinates", STANDARD_COORDINATES)),
            parameters={k: _domain(v) for k, v in sym["parameters"].items()},
            functions=dict(sym.get("functions", {})),
            coordinate_domains={k: _domain(v) for k, v in sym.get("coordinate_domains", {}).items()},
            function_domain=_domain(sym["function_domain"]) if "function_domain" in sym else DEFAULT_DOMAIN,
        )
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc

    def P(text: str, path: str) -> Expr:
        return normalize(_parse(text, table, f"{where}: {path}"))

    m = data["metric"]
    if "ds2" in m:
        g = read_quadratic_form(m["ds2"], table, f"{where}: metric.ds2")
    else:
        n = len(table.coordinates)
        g = [[ZERO] * n for _ in range(n)]
        seen: dict[tuple[int, int], Expr] = {}
        for key, text in m["components"].items():
            i, j = int(key[0]), int(key[1])
            v = P(text, f"metric.components.{key}")
            lo, hi = min(i, j), max(i, j)
            if (lo, hi) in seen and seen[(lo, hi)] != v:
                raise SchemaError(f"{where}: metric entries {lo}{hi} and {hi}{lo} differ", path=f"metric/components/{key}")
            seen[(lo, hi)] = v
            g[i][j] = g[j][i] = v
    metric = MetricSpec(tuple(tuple(r) for r in g), tuple(data.get("signature_params", ())))

    k = data["killing"]
    ops = tuple(_operator(item, table, f"{where}: killing.operators[{i}]") for i, item in enumerate(k["operators"]))
    independent = tuple(i - 1 for i in k.get("independent", (1, 2, 3)))
    dependent = k.get("dependent", 4) - 1
    if dependent in independent:
        raise SchemaError(f"{where}: dependent operator listed as independent")
    basis = KillingBasis(ops, independent, dependent)

    pr = data["printed"]
    entries = {}
    for pair, comps in pr["C"].items():
        for d, text in comps.items():
            entries[(int(d) - 1, int(pair[0]) - 1, int(pair[1]) - 1)] = P(text, f"printed.C.{pair}.{d}")
    try:
        printed_C = StructureConstants.from_entries(entries)
    except ValueError as exc:
        raise SchemaError(f"{where}: printed.C: {exc}") from exc

    def mat(rows, path):
        return tuple(tuple(P(s, f"{path}[{i}][{j}]") for j, s in enumerate(r)) for i, r in enumerate(rows))

    def vec(items, path):
        return tuple(P(s, f"{path}[{i}]") for i, s in enumerate(items))

    potential = None
    if pr.get("potential") is not None:
        potential = PotentialCandidate(vec(pr["potential"], "printed.potential"), "as printed")
    printed_ops = None
    if "operators" in pr:
        printed_ops = tuple(_operator(item, table, f"{where}: printed.operators[{i}]")
                            for i, item in enumerate(pr["operators"]))
    outcome = data["expected_outcome"]
    return GroupCase(
        id=data["id"],
        bianchi_label=data["bianchi_label"],
        transitivity=data["transitivity"],
        table=table,
        metric=metric,
        killing=basis,
        printed_C=printed_C,
        printed_lambda=mat(pr["lambda"], "printed.lambda") if "lambda" in pr else None,
        printed_omega=vec(pr["omega"], "printed.omega") if "omega" in pr else None,
        printed_W=mat(pr["W"], "printed.W") if "W" in pr else None,
        printed_potential=potential,
        printed_nonholonomic=vec(pr["nonholonomic"], "printed.nonholonomic") if "nonholonomic" in pr else None,
        printed_metric=pr.get("metric"),
        printed_operators=printed_ops,
        expected_outcome=outcome,
        flags=tuple(Flag(f["field"], f["note"]) for f in data.get("flags", ())),
        description=data.get("description", ""),
        source=source,
    )


# ---------------------------------------------------------------- writing

def _components(v: VectorField) -> list[str]:
    return [render(x) for x in v.components]


def case_to_dict(case: GroupCase) -> dict:
    """Canonical JSON form: metric and operators as explicit component tables."""
    t = case.table
    sym: dict[str, Any] = {"coordinates": list(t.coordinates),
                           "parameters": {k: d.to_json() for k, d in sorted(t.parameters.items())}}
    if t.functions:
        sym["functions"] = dict(sorted(t.functions.items()))
    if t.coordinate_domains:
        sym["coordinate_domains"] = {k: d.to_json() for k, d in sorted(t.coordinate_domains.items())}
    if t.function_domain != DEFAULT_DOMAIN:
        sym["function_domain"] = t.function_domain.to_json()
    g = case.metric.g_cov
    comps = {f"{i}{j}": render(g[i][j]) for i in range(len(g)) for j in range(i, len(g)) if not is_const(g[i][j], 0)}
    printed: dict[str, Any] = {"C": case.printed_C.to_json()}
    if case.printed_metric is not None:
        printed["metric"] = case.printed_metric
    if case.printed_operators is not None:
        printed["operators"] = [_components(v) for v in case.printed_operators]
    if case.printed_lambda is not None:
        printed["lambda"] = [[render(x) for x in r] for r in case.printed_lambda]
    if case.printed_omega is not None:
        printed["omega"] = [render(x) for x in case.printed_omega]
    if case.printed_W is not None:
        printed["W"] = [[render(x) for x in r] for r in case.printed_W]
    printed["potential"] = None if case.printed_potential is None else [render(x) for x in case.printed_potential.A]
    if case.printed_nonholonomic is not None:
        printed["nonholonomic"] = [render(x) for x in case.printed_nonholonomic]
    out = {
        "schema": SCHEMA_VERSION,
        "id": case.id,
        "bianchi_label": case.bianchi_label,
        "transitivity": case.transitivity,
        "symbols": sym,
        "metric": {"components": comps},
        "killing": {"operators": [_components(v) for v in case.killing.xi],
                    "independent": [i + 1 for i in case.killing.independent],
                    "dependent": case.killing.dependent + 1},
        "printed": printed,
        "expected_outcome": case.expected_outcome,
        "flags": [{"field": f.field, "note": f.note} for f in case.flags],
    }
    if case.metric.signature_params:
        out["signature_params"] = list(case.metric.signature_params)
    if case.description:
        out["description"] = case.description
    return out


def dumps_case(case: GroupCase) -> str:
    return json.dumps(case_to_dict(case), indent=2, ensure_ascii=False) + "\n"
