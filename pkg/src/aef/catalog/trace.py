"""Stage-by-stage record of the reduction for one case, for the `classify` command."""
from __future__ import annotations

from typing import Any

from ..expr import SymbolTable, is_const, render, zero_test_settings
from ..expr.compact import compact
from ..admissibility import extend_with_functions
from .model import GroupCase
from .verify import Recomputed, case_seed, verify_case

STAGE_CHECKS = {"lambda": "lambda", "omega": "omega", "c_tilde": "structure_constants", "W0": "W_nullspace",
                "potential": "pipeline_vs_printed", "outcome": "outcome"}


def _m(rows, table: SymbolTable) -> list[list[str]]:
    return [[render(compact(x, table)) for x in r] for r in rows]


def _v(xs, table: SymbolTable) -> list[str]:
    return [render(compact(x, table)) for x in xs]


def classify_trace(case: GroupCase, seed: int = 0, trials: int | None = None, tol: float | None = None) -> dict:
    rc = Recomputed()
    report = verify_case(case, seed=seed, trials=trials, tol=tol, keep=rc)
    t = case.table
    out: dict[str, Any] = {"case": case.id, "bianchi_label": case.bianchi_label}
    with zero_test_settings(seed=case_seed(seed, case.id) + 1):
        if rc.frame is not None:
            fr = rc.frame
            out["lambda"] = _m(fr.lam, t)
            out["omega"] = _v(fr.omega, t)
            ct = {}
            for g in range(3):
                for a in range(4):
                    for b in range(a + 1, 4):
                        x = fr.c_tilde[g][a][b]
                        if not is_const(x, 0):
                            ct.setdefault(str(g + 1), {})[f"{a + 1}{b + 1}"] = render(compact(x, t))
            out["c_tilde"] = ct
        p = rc.pipeline
        if p is not None:
            out["W0"] = _m(p.W0, t)
            out["theta"] = {str(k + 1): _v(row, t) for k, row in sorted(p.initial.theta.items())}
            out["reduction"] = {"status": p.state.status,
                                "steps": [{"step": h["step"], "free": [i + 1 for i in h["free"]], "rank": h["rank"]}
                                          for h in p.state.history]}
            sol = {"status": p.solution.status, "note": p.solution.note}
            if p.solution.f:
                sol["f"] = [render(x) for x in p.solution.f]
            out["residual_system"] = sol
            if p.potential is not None:
                pt = extend_with_functions(t, p.solution)
                if p.nonholonomic is not None:
                    out["nonholonomic"] = _v(p.nonholonomic.components, pt)
                out["potential"] = _v(p.potential.A, pt)
            out["outcome"] = p.outcome
    out["expected_outcome"] = case.expected_outcome
    out["discrepancies"] = {}
    for stage, name in STAGE_CHECKS.items():
        try:
            chk = report.check(name)
        except KeyError:
            continue
        if chk.discrepancies:
            out["discrepancies"][stage] = [d.to_json() for d in chk.discrepancies]
    out["failed_checks"] = report.failing()
    out["conclusion"] = conclusion(out)
    return out


def conclusion(trace: dict) -> str:
    outcome = trace.get("outcome")
    if outcome == "NoField":
        return "no admissible field"
    if outcome == "ZeroField":
        return "A = 0 (only a pure gauge potential is admissible)"
    if "potential" in trace:
        return f"A = ({', '.join(trace['potential'])})"
    return f"pipeline stopped: {trace.get('residual_system', {}).get('note', 'see failed checks')}"


def trace_markdown(trace: dict) -> str:
    lines = [f"# Reduction trace for case {trace['case']} ({trace['bianchi_label']})", ""]

    def block(title: str, rows):
        lines.append(f"## {title}")
        lines.append("")
        lines.append("```")
        for r in rows:
            lines.append(r)
        lines.append("```")
        lines.append("")

    if "lambda" in trace:
        block("lambda", ["[" + ", ".join(r) + "]" for r in trace["lambda"]])
        block("omega", ["(" + ", ".join(trace["omega"]) + ")"])
        block("C-tilde (nonzero)", [f"Ct^{g}_{ab} = {v}" for g, d in trace["c_tilde"].items() for ab, v in d.items()])
    if "W0" in trace:
        block("W(0)", ["[" + ", ".join(r) + "]" for r in trace["W0"]])
        block("theta", [f"A_{k} = " + " + ".join(f"({x})*f{j + 1}" for j, x in enumerate(v))
                        for k, v in trace["theta"].items()] or ["(no pivots)"])
        red = trace["reduction"]
        block("reduction", [f"step {s['step']}: free {s['free']} rank {s['rank']}" for s in red["steps"]]
              + [red["status"]])
        rs = trace["residual_system"]
        block("residual system", [f"{rs['status']}: {rs['note']}"] + [f"f = {x}" for x in rs.get("f", [])])
    if "nonholonomic" in trace:
        block("nonholonomic components", ["(" + ", ".join(trace["nonholonomic"]) + ")"])
    if trace["discrepancies"]:
        rows = []
        for stage, ds in trace["discrepancies"].items():
            for d in ds:
                tag = "documented" if d["documented"] else "UNDOCUMENTED"
                rows.append(f"{stage} {d['where']}: printed {d['printed']} / recomputed {d['recomputed']} ({tag})")
        block("printed tables that differ", rows)
    lines.append(f"**{trace['conclusion']}** (outcome {trace.get('outcome')}, expected {trace['expected_outcome']})")
    return "\n".join(lines) + "\n"
