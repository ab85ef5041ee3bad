"""Run the full check battery on a case and diff the recomputation against the printed tables."""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from ..admissibility import (PipelineResult, check_admissibility, check_closure, classify,
                             compatibility_residuals, extend_with_functions, match_potential,
                             annihilation_residuals, null_space, residual_report)
from ..errors import AefError
from ..expr import (ZERO, Expr, Func, SymbolTable, atoms, is_const, linalg, normalize, render, sub,
                    zero_test, zero_test_settings)
from ..expr.compact import compact
from ..geometry import is_killing, metric_inverse
from ..lie import (ReductionFrame, StructureConstants, lambda_identity_residuals, omega_identity_residuals,
                   recover_structure_constants, reduction_frame)
from .model import GroupCase, read_quadratic_form

PASS, FAIL, DISCREPANCY, SKIPPED = "pass", "fail", "discrepancy", "skipped"


@dataclass
class Discrepancy:
    """A printed entry that disagrees with its recomputed value."""

    field: str
    where: str
    printed: str
    recomputed: str
    witness: dict | None
    documented: bool
    recomputed_ok: bool

    def to_json(self) -> dict:
        return {"field": self.field, "where": self.where, "printed": self.printed, "recomputed": self.recomputed,
                "witness": self.witness, "documented": self.documented, "recomputed_ok": self.recomputed_ok}


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""
    witness: dict | None = None
    discrepancies: list[Discrepancy] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class CaseReport:
    case_id: str
    bianchi_label: str
    expected_outcome: str
    outcome: str | None = None
    potential: list[str] | None = None
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def discrepancies(self) -> list[Discrepancy]:
        return [d for c in self.checks for d in c.discrepancies]

    @property
    def passed(self) -> bool:
        """True iff nothing failed outright; documented discrepancies with a sound recomputation are fine."""
        return all(c.status != FAIL for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if c.status == FAIL]

    def to_json(self) -> dict:
        return {
            "case": self.case_id,
            "bianchi_label": self.bianchi_label,
            "passed": self.passed,
            "expected_outcome": self.expected_outcome,
            "outcome": self.outcome,
            "potential": self.potential,
            "checks": [c.to_json() for c in self.checks],
            "discrepancies": [d.to_json() for d in self.discrepancies],
            "notes": list(self.notes),
        }

    def to_markdown(self) -> str:
        lines = [f"## Case {self.case_id} ({self.bianchi_label})", "",
                 f"- result: **{'PASS' if self.passed else 'FAIL'}**",
                 f"- outcome: {self.outcome} (expected {self.expected_outcome})"]
        if self.potential is not None:
            lines.append(f"- potential: A = ({', '.join(self.potential)})")
            nonzero = [f"A_{i} = {a}" for i, a in enumerate(self.potential) if a != "0"]
            lines.append(f"- components: {', '.join(nonzero) if nonzero else 'all zero'}")
        lines += ["", "| check | status | detail |", "|---|---|---|"]
        for c in self.checks:
            detail = c.detail.replace("|", "\\|")
            if c.witness:
                detail += f" (witness {json.dumps(c.witness, sort_keys=True)})"
            lines.append(f"| {c.name} | {c.status} | {detail} |")
        ds = self.discrepancies
        if ds:
            lines += ["", "### Printed vs recomputed", ""]
            for d in ds:
                tag = "documented" if d.documented else "UNDOCUMENTED"
                ok = "recomputation certified" if d.recomputed_ok else "recomputation NOT certified"
                lines.append(f"- `{d.field}` {d.where} ({tag}, {ok})")
                lines.append(f"  - printed: `{d.printed}`")
                lines.append(f"  - recomputed: `{d.recomputed}`")
                if d.witness:
                    lines.append(f"  - differs at: `{json.dumps(d.witness, sort_keys=True)}`")
        for n in self.notes:
            lines.append(f"- note: {n}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- helpers

def case_seed(base: int, case_id: str) -> int:
    """Per-case stream so a report does not depend on which other cases ran first."""
    return (base * 1_000_003 + zlib.crc32(case_id.encode())) % (2**63)


def line_element(g: Sequence[Sequence[Expr]], table: SymbolTable) -> str:
    """g_ij du_i du_j written in the parser grammar."""
    n = len(g)
    terms = []
    for i in range(n):
        for j in range(i, n):
            x = g[i][j]
            if is_const(x, 0):
                continue
            di, dj = f"d{table.coordinates[i]}", f"d{table.coordinates[j]}"
            diff = f"{di}^2" if i == j else f"2*{di}*{dj}"
            terms.append(f"({render(x)})*{diff}")
    return " + ".join(terms) or "0"


def _differs(a: Expr, b: Expr, table: SymbolTable) -> dict | None:
    """None if a == b under the zero test, otherwise a witness point."""
    d = normalize(sub(a, b))
    if is_const(d, 0):
        return None
    res = zero_test(d, table)
    return None if res.zero else (res.witness or {})


def _show(e: Expr, table: SymbolTable) -> str:
    try:
        return render(compact(e, table))
    except AefError:
        return render(e)


def _table_with_functions(table: SymbolTable, exprs) -> SymbolTable:
    """Declare any opaque function that appears in `exprs` but not in the table."""
    extra = {}
    for e in exprs:
        for a in atoms(e):
            if isinstance(a, Func) and a.name not in table.functions:
                extra[a.name] = a.var
    return table.extended(functions=extra) if extra else table


class _Runner:
    """Records each check; exceptions become failing checks instead of escaping."""

    def __init__(self, case: GroupCase, report: CaseReport):
        self.case = case
        self.report = report

    def run(self, name: str, fn: Callable[[], Check | None], needs: Sequence[Any] = ()) -> Check:
        if any(x is None for x in needs):
            chk = Check(name, SKIPPED, "prerequisite failed")
        else:
            try:
                chk = fn() or Check(name, PASS)
            except AefError as exc:
                chk = Check(name, FAIL, f"{exc.code}: {exc}", exc.context.get("witness"))
        chk.name = name
        self.report.checks.append(chk)
        return chk

    def compare(self, name: str, fieldname: str, pairs, table: SymbolTable, recomputed_ok: bool = True) -> Check:
        """pairs: (where, printed Expr, recomputed Expr)."""
        documented = self.case.flagged(fieldname)
        ds = []
        for where, printed, recomputed in pairs:
            w = _differs(printed, recomputed, table)
            if w is not None:
                ds.append(Discrepancy(fieldname, where, render(printed), _show(recomputed, table), w,
                                      documented, recomputed_ok))
        return _verdict(name, ds, f"{len(pairs)} entries agree")


def _verdict(name: str, ds: list[Discrepancy], ok_detail: str) -> Check:
    if not ds:
        return Check(name, PASS, ok_detail)
    explained = all(d.documented and d.recomputed_ok for d in ds)
    status = DISCREPANCY if explained else FAIL
    detail = f"{len(ds)} printed entr{'y differs' if len(ds) == 1 else 'ies differ'}"
    if not explained:
        detail += "; not covered by a documented flag with a certified recomputation"
    return Check(name, status, detail, ds[0].witness, ds)


def _residual_check(name: str, items, table: SymbolTable) -> Check:
    rep = residual_report(items, table)
    bad = rep.failures()
    if not bad:
        return Check(name, PASS, f"{len(rep.entries)} residuals vanish")
    return Check(name, FAIL, f"{len(bad)} of {len(rep.entries)} residuals nonzero, first {bad[0].label}",
                 bad[0].witness)


# ---------------------------------------------------------------- the battery

@dataclass
class Recomputed:
    """Intermediate objects kept for trace output."""

    g_inv: list | None = None
    C: StructureConstants | None = None
    frame: ReductionFrame | None = None
    pipeline: PipelineResult | None = None


def verify_case(case: GroupCase, seed: int = 0, trials: int | None = None, tol: float | None = None,
                keep: Recomputed | None = None) -> CaseReport:
    settings: dict[str, Any] = {"seed": case_seed(seed, case.id)}
    if trials is not None:
        settings["trials"] = trials
    if tol is not None:
        settings["tol"] = tol
    with zero_test_settings(**settings):
        return _verify(case, keep if keep is not None else Recomputed())


def _verify(case: GroupCase, rc: Recomputed) -> CaseReport:
    t = case.table
    basis = case.killing
    report = CaseReport(case.id, case.bianchi_label, case.expected_outcome)
    run = _Runner(case, report)

    def metric_check():
        rc.g_inv = metric_inverse(case.metric, t)
        return Check("metric", PASS, "inverse certified")

    run.run("metric", metric_check)

    def printed_metric():
        if case.printed_metric is None:
            return Check("printed_metric", SKIPPED, "no printed line element")
        stored = line_element(case.metric.g_cov, t)
        try:
            g = read_quadratic_form(case.printed_metric, t, "printed.metric")
        except AefError as exc:
            d = Discrepancy("metric", "line element", case.printed_metric, stored, None, case.flagged("metric"),
                            True)
            chk = _verdict("printed_metric", [d], "")
            chk.detail += f" ({exc})"
            return chk
        n = len(g)
        pairs = [(f"g{i}{j}", g[i][j], case.metric.g_cov[i][j]) for i in range(n) for j in range(i, n)]
        return run.compare("printed_metric", "metric", pairs, t)

    run.run("printed_metric", printed_metric)

    def killing():
        for a, xi in enumerate(basis.xi):
            ok, w = is_killing(rc.g_inv, xi, t)
            if not ok:
                return Check("killing", FAIL, f"X{a + 1} is not a Killing vector, residual entry {w['entry']}",
                             w["point"])
        return Check("killing", PASS, f"all {len(basis.xi)} operators satisfy the Killing equation")

    run.run("killing", killing, needs=[rc.g_inv])

    def printed_operators():
        if case.printed_operators is None:
            return Check("printed_operators", SKIPPED, "operators stored as printed")
        pairs = [(f"X{a + 1}[{i}]", p[i], s[i])
                 for a, (p, s) in enumerate(zip(case.printed_operators, basis.xi)) for i in range(len(s))]
        return run.compare("printed_operators", "killing", pairs, t)

    run.run("printed_operators", printed_operators)

    def closure():
        rc.C = recover_structure_constants(basis, t, hints=case.printed_C)
        reps = check_closure(basis, rc.C, t)
        for pair, rep in sorted(reps.items()):
            if not rep.passed:
                f = rep.failures()[0]
                rc.C = None
                return Check("closure", FAIL, f"[X{pair[0]}, X{pair[1]}] residual {f.label}", f.witness)
        return Check("closure", PASS, "all brackets close on the recovered constants")

    run.run("closure", closure)

    def jacobi():
        return _residual_check("jacobi", [(f"{i}", r) for i, r in rc.C.jacobi_residuals()], t)

    run.run("jacobi", jacobi, needs=[rc.C])

    def constants():
        n = rc.C.n
        pairs = [(f"C^{d + 1}_{a + 1}{b + 1}", case.printed_C(d, a, b), rc.C(d, a, b))
                 for a in range(n) for b in range(a + 1, n) for d in range(n)]
        return run.compare("structure_constants", "C", pairs, t)

    run.run("structure_constants", constants, needs=[rc.C])

    def frame():
        rc.frame = reduction_frame(basis, rc.C, t)
        return Check("frame", PASS, "lambda and omega certified")

    run.run("frame", frame, needs=[rc.C])

    def lam():
        if case.printed_lambda is None:
            return Check("lambda", SKIPPED, "not printed")
        pairs = [(f"lambda[{b + 1}][{a + 1}]", case.printed_lambda[b][a], rc.frame.lam[b][a])
                 for b in range(3) for a in range(3)]
        return run.compare("lambda", "lambda", pairs, t)

    run.run("lambda", lam, needs=[rc.frame])

    def om():
        if case.printed_omega is None:
            return Check("omega", SKIPPED, "not printed")
        pairs = [(f"omega^{a + 1}", case.printed_omega[a], rc.frame.omega[a]) for a in range(3)]
        return run.compare("omega", "omega", pairs, t)

    run.run("omega", om, needs=[rc.frame])

    run.run("lambda_identity", lambda: _residual_check(
        "lambda_identity", [(str(k), r) for k, r in enumerate(lambda_identity_residuals(basis, rc.frame, t))], t),
        needs=[rc.frame])
    run.run("omega_identity", lambda: _residual_check(
        "omega_identity", [(str(k), r) for k, r in enumerate(omega_identity_residuals(basis, rc.frame, t))], t),
        needs=[rc.frame])

    def pipeline():
        rc.pipeline = classify(rc.frame, basis, t)
        p = rc.pipeline
        trace = " -> ".join(str([i + 1 for i in h["free"]]) for h in p.state.history)
        return Check("reduction", PASS, f"{p.state.status}, free components {trace}, residual system "
                                        f"{p.solution.status}")

    run.run("reduction", pipeline, needs=[rc.frame])

    def w_nullspace():
        if case.printed_W is None:
            return Check("W_nullspace", SKIPPED, "not printed")
        ours = rc.pipeline.initial
        W = [list(r) for r in case.printed_W]
        documented = case.flagged("W")
        try:
            theirs = null_space(W, t, ncols=3)
        except AefError as exc:
            d = Discrepancy("W", "null space", _rows(W), _cols(ours.N, t), None, documented, True)
            chk = _verdict("W_nullspace", [d], "")
            chk.detail += f" ({exc.code})"
            return chk
        ds = []
        if theirs.rank != ours.rank:
            ds.append(Discrepancy("W", "rank", str(theirs.rank), str(ours.rank), None, documented, True))
        else:
            prod = linalg.matmul(W, ours.N)
            for i, row in enumerate(prod):
                for j, x in enumerate(row):
                    w = _differs(x, ZERO, t)
                    if w is not None:
                        ds.append(Discrepancy("W", f"row {i + 1} on solution {j + 1}", _rows(W), _cols(ours.N, t),
                                              w, documented, True))
                        break
                if ds:
                    break
        return _verdict("W_nullspace", ds, f"printed and recomputed constraints have the same solutions "
                                           f"(rank {ours.rank})")

    run.run("W_nullspace", w_nullspace, needs=[rc.pipeline])

    def admissibility():
        p = rc.pipeline
        if p.potential is None:
            return Check("admissibility", FAIL, f"residual system {p.solution.status}: {p.solution.note}")
        if p.admissibility is None:
            return Check("admissibility", PASS, "zero potential")
        rep = p.admissibility
        if not rep.passed:
            f = rep.failures()[0]
            return Check("admissibility", FAIL, f"residual {f.label} nonzero", f.witness)
        return Check("admissibility", PASS, f"all {len(rep.entries)} residuals vanish")

    adm = run.run("admissibility", admissibility, needs=[rc.pipeline])
    pipeline_ok = adm.status == PASS

    def outcome():
        p = rc.pipeline
        report.outcome = p.outcome
        if p.potential is not None:
            ptable = extend_with_functions(t, p.solution)
            report.potential = [_show(x, ptable) for x in p.potential.A]
        if p.outcome == case.expected_outcome:
            return Check("outcome", PASS, f"{p.outcome} as expected")
        d = Discrepancy("outcome", "pipeline outcome", case.expected_outcome, p.outcome, None,
                        case.flagged("outcome"), pipeline_ok)
        return _verdict("outcome", [d], "")

    run.run("outcome", outcome, needs=[rc.pipeline])

    def printed_admissibility():
        if case.printed_potential is None:
            return Check("printed_admissibility", SKIPPED, "no printed potential")
        pt = _table_with_functions(t, case.printed_potential.A)
        rep = check_admissibility(case.printed_potential, basis, pt)
        if rep.passed:
            return Check("printed_admissibility", PASS, f"all {len(rep.entries)} residuals vanish")
        f = rep.failures()[0]
        d = Discrepancy("potential", f"admissibility residual {f.label}",
                        ", ".join(render(x) for x in case.printed_potential.A), _show(f.residual, pt),
                        f.witness, case.flagged("potential"), pipeline_ok)
        return _verdict("printed_admissibility", [d], "")

    run.run("printed_admissibility", printed_admissibility)

    def versus_printed():
        if case.printed_potential is None:
            return Check("pipeline_vs_printed", SKIPPED, "no printed potential")
        m = match_potential(rc.pipeline, case.printed_potential, basis, t)
        if m.matched:
            subs = ", ".join(f"{k} = {render(v)}" for k, v in sorted(m.substitution.items()))
            return Check("pipeline_vs_printed", PASS, "gauge equivalent" + (f" with {subs}" if subs else ""))
        w = None
        if m.report is not None and m.report.failures():
            w = m.report.failures()[0].witness
        d = Discrepancy("potential", "gauge class", ", ".join(render(x) for x in case.printed_potential.A),
                        ", ".join(report.potential or []), w, case.flagged("potential"), pipeline_ok)
        chk = _verdict("pipeline_vs_printed", [d], "")
        chk.detail += f" ({m.reason})"
        return chk

    run.run("pipeline_vs_printed", versus_printed, needs=[rc.pipeline])

    def identities():
        p = rc.pipeline
        if p.nonholonomic is None:
            return Check("compatibility", SKIPPED, "no nonholonomic solution")
        pt = extend_with_functions(t, p.solution)
        items = [("compat " + k, r) for k, r in compatibility_residuals(p.nonholonomic, basis, rc.C, rc.frame, pt)]
        items += [("annihilation d" + k, r) for k, r in annihilation_residuals(p.nonholonomic, rc.frame, pt)]
        return _residual_check("compatibility", items, pt)

    run.run("compatibility", identities, needs=[rc.pipeline])

    for f in case.flags:
        if f.field == "bianchi_label":
            report.notes.append(f"label: {f.note}")
    return report


def _rows(m) -> str:
    return "[" + "; ".join(", ".join(render(x) for x in r) for r in m) + "]"


def _cols(N, table: SymbolTable) -> str:
    cols = list(zip(*N)) if N and N[0] else []
    if not cols:
        return "only the zero solution"
    return "span of " + ", ".join("(" + ", ".join(_show(x, table) for x in c) + ")" for c in cols)


def summary(reports: Sequence[CaseReport]) -> dict:
    return {
        "cases": len(reports),
        "passed": sum(r.passed for r in reports),
        "failed": [r.case_id for r in reports if not r.passed],
        "documented_discrepancies": sum(1 for r in reports for d in r.discrepancies if d.documented),
        "undocumented_discrepancies": sum(1 for r in reports for d in r.discrepancies if not d.documented),
    }
