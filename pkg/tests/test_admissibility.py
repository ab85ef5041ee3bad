import pytest

from aef.admissibility import (contract, LinearMomentumFunction, check_admissibility, check_bracket_decomposition, classify,
                               gauge_equivalent, null_space, w0_matrix)
from aef.catalog import load_case
from aef.expr import ZERO, Const, add, differentiate, evaluate, is_zero, linalg, mul, normalize, parse
from aef.geometry import PotentialCandidate, metric_inverse
from aef.lie import reduction_frame

ADMISSIBLE_PRINTED = ["3.1.1", "3.1.2", "3.1.3", "3.1.4", "3.2.2", "3.2.3"]


@pytest.mark.parametrize("cid", ADMISSIBLE_PRINTED)
def test_printed_potential_is_admissible(cid):
    case = load_case(cid)
    assert check_admissibility(case.printed_potential, case.killing, case.table).passed


def test_perturbed_potential_fails_with_a_witness():
    case = load_case("3.1.1")
    t = case.table
    A = list(case.printed_potential.A)
    A[2] = normalize(add(A[2], parse("u1", t)))
    rep = check_admissibility(PotentialCandidate(tuple(A)), case.killing, t)
    assert not rep.passed
    bad = rep.failures()[0]
    assert bad.witness is not None
    assert abs(evaluate(bad.residual, bad.witness)) > 1e-6


def test_gauge_term_keeps_admissibility_and_equivalence():
    case = load_case("3.1.2")
    t = case.table
    chi = parse("u0^2", t)   # invariant under every operator of this case
    B = PotentialCandidate(tuple(normalize(add(a, differentiate(chi, c))) for a, c in zip(case.printed_potential.A,
                                                                                        t.coordinates)))
    assert check_admissibility(B, case.killing, t).passed
    assert gauge_equivalent(case.printed_potential, B, case.killing, t).passed


def test_bracket_with_hamiltonian_vanishes_for_admissible_field():
    case = load_case("3.1.1")
    t = case.table
    gi = metric_inverse(case.metric, t)
    for a in range(4):
        # in kinetic momentum p + A the conserved charge xi.p reads xi.(p + A) - xi.A
        Y = LinearMomentumFunction(case.killing[a], normalize(mul(Const(-1), contract(case.killing[a],
                                                                                      case.printed_potential.A))))
        parts = check_bracket_decomposition(gi, case.printed_potential, Y, t)
        assert parts["quadratic"].passed
        assert parts["linear"].passed


def test_null_space_is_certified():
    t = load_case("3.1.1").table
    W = [[parse(s, t) for s in row] for row in (["u3", "-1", "0"], ["-u2", "0", "1"], ["0", "0", "0"])]
    ns = null_space(W, t)
    assert ns.rank == 2 and len(ns.free) == 1
    prod = linalg.matmul(W, ns.N)
    assert all(is_zero(x, t) for row in prod for x in row)


def test_null_space_of_zero_matrix_is_everything():
    t = load_case("3.1.1").table
    ns = null_space([[ZERO] * 3], t)
    assert ns.rank == 0 and ns.free == (0, 1, 2)


def test_w0_has_the_printed_null_space():
    case = load_case("3.1.1")
    t = case.table
    C = case.printed_C
    fr = reduction_frame(case.killing, C, t)
    W = w0_matrix(fr, case.killing, t, essential=False)
    ours, theirs = null_space(W, t, ncols=3), null_space([list(r) for r in case.printed_W], t, ncols=3)
    assert ours.rank == theirs.rank
    assert all(is_zero(x, t) for row in linalg.matmul(W, theirs.N) for x in row)


@pytest.mark.parametrize("cid,outcome", [("3.1.1", "PotentialFound"), ("3.1.3", "PotentialFound")])
def test_pipeline_outcome(cid, outcome):
    case = load_case(cid)
    t = case.table
    fr = reduction_frame(case.killing, case.printed_C, t)
    res = classify(fr, case.killing, t)
    assert res.outcome == outcome
    assert res.potential is not None
