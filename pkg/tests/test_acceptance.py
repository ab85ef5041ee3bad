"""Acceptance criteria 1-8, one test each; every test records a PASS/FAIL line that is
repeated in the terminal summary."""
import subprocess
import sys
import time
from pathlib import Path

import pytest

from _acceptance_log import record
from aef.admissibility import check_admissibility
from aef.catalog import case_ids, load_case
from aef.catalog.verify import DISCREPANCY, PASS, verify_case
from aef.dynamics import conservation_report, halving_ratio, instantiate, integrate
from aef.expr import add, evaluate, normalize, parse, zero_test_settings
from aef.geometry import PotentialCandidate, is_killing, metric_inverse

HERE = Path(__file__).resolve().parent
ZERO_TEST = {"tol": 1e-9, "trials": 24}


@pytest.fixture(scope="module")
def cases():
    return [load_case(cid) for cid in case_ids()]


@pytest.fixture(scope="module")
def reports(cases):
    return {c.id: verify_case(c, seed=0, **ZERO_TEST) for c in cases}


def test_criterion_1_killing_vectors(cases):
    t0 = time.perf_counter()
    bad = []
    with zero_test_settings(seed=0, **ZERO_TEST):
        for case in cases:
            gi = metric_inverse(case.metric, case.table)
            for a, xi in enumerate(case.killing.xi):
                ok, _ = is_killing(gi, xi, case.table)
                if not ok:
                    bad.append(f"{case.id}:X{a + 1}")
    elapsed = time.perf_counter() - t0
    ok = not bad and len(cases) >= 16 and elapsed < 60
    record(1, ok, f"{4 * len(cases)} operators over {len(cases)} cases, {elapsed:.1f} s"
                  + (f"; not Killing: {', '.join(bad)}" if bad else ""))
    assert ok


def test_criterion_2_structure_constants(reports):
    bad = []
    for cid, r in reports.items():
        if r.check("closure").status != PASS or r.check("jacobi").status != PASS:
            bad.append(f"{cid} (closure/Jacobi)")
        if r.check("structure_constants").status not in (PASS, DISCREPANCY):
            bad.append(f"{cid} (undocumented mismatch)")
    documented = sum(r.check("structure_constants").status == DISCREPANCY for r in reports.values())
    record(2, not bad, f"{len(reports)} cases, {documented} with documented printed-table differences"
                       + (f"; failing: {', '.join(bad)}" if bad else ""))
    assert not bad


def test_criterion_3_pipeline_reproduces_printed_potentials(cases, reports):
    bad = []
    n = 0
    for case in cases:
        if case.expected_outcome != "PotentialFound":
            continue
        n += 1
        r = reports[case.id]
        if r.outcome != "PotentialFound" or r.check("pipeline_vs_printed").status != PASS:
            bad.append(f"{case.id} ({r.outcome}, {r.check('pipeline_vs_printed').status})")
    record(3, not bad, f"{n - len(bad)} of {n} printed potentials reproduced up to gauge"
                       + (f"; not reproduced: {', '.join(bad)}" if bad else ""))
    assert not bad


def test_criterion_4_negative_branches(reports):
    a, b = reports["3.3.3-eps1"], reports["3.3.4-eps0"]
    ok_a = a.outcome == "NoField"
    ok_b = b.outcome == "ZeroField"
    record(4, ok_a and ok_b, f"3.3.3-eps1 -> {a.outcome} (want NoField); 3.3.4-eps0 -> {b.outcome}"
                             f" {b.potential or ''} (want ZeroField)")
    assert ok_a and ok_b


def test_criterion_5_admissibility_residuals(cases):
    bad = []
    n = 0
    for case in cases:
        if case.printed_potential is None:
            continue
        n += 1
        rep = check_admissibility(case.printed_potential, case.killing, case.table)
        assert len(rep.entries) == 16
        if not rep.passed:
            bad.append(f"{case.id} ({rep.failures()[0].label})")
    case = load_case("3.1.1")
    A = list(case.printed_potential.A)
    A[2] = normalize(add(A[2], parse("u1", case.table)))
    rep = check_admissibility(PotentialCandidate(tuple(A)), case.killing, case.table)
    caught = not rep.passed and all(abs(evaluate(f.residual, f.witness)) > 1e-6 for f in rep.failures())
    ok = not bad and caught
    record(5, ok, f"{n - len(bad)} of {n} printed potentials admissible; perturbation "
                  f"{'caught with witness' if caught else 'NOT caught'}"
                  + (f"; inadmissible: {', '.join(bad)}" if bad else ""))
    assert ok


def test_criterion_6_conservation_along_trajectories():
    parts, ok = [], True
    for cid in ("3.1.1", "3.1.4", "3.2.3"):
        inst = instantiate(load_case(cid))
        rep = conservation_report(integrate(inst, dt=1e-3, t_end=10.0), tol=1e-8)
        worst = max(e.drift for e in rep.entries)
        coarse, fine, ratio = halving_ratio(inst, 0.01, 10.0, "H")
        good = rep.passed and 12 <= ratio <= 20
        ok &= good
        parts.append(f"{cid} max drift {worst:.1e}, H-drift ratio {ratio:.1f}")
    record(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_identities(reports):
    names = ("compatibility", "omega_identity", "lambda_identity", "jacobi")
    bad = [f"{cid}:{n}" for cid, r in reports.items() for n in names if r.check(n).status != PASS]
    record(7, not bad, f"{len(names)} identity checks on {len(reports)} cases"
                       + (f"; failing: {', '.join(bad)}" if bad else ""))
    assert not bad


def test_criterion_8_kernel_properties():
    kernel = [str(HERE / "test_expr.py")] + [f"{HERE / 'test_geometry_lie.py'}::{name}" for name in (
        "test_inverse_is_certified", "test_singular_metric_is_reported", "test_faraday_is_gauge_invariant",
        "test_faraday_is_antisymmetric")]
    t0 = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *kernel],
                       capture_output=True, text=True, cwd=HERE.parent, check=False)
    elapsed = time.perf_counter() - t0
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr.strip()[-200:]
    ok = r.returncode == 0 and elapsed < 30
    record(8, ok, f"{tail} ({elapsed:.1f} s wall including interpreter start)")
    assert ok
