import pytest
from hypothesis import given

from aef.errors import DegenerateBlock, InconsistentDependentOperator, NotClosed, SingularMetric
from aef.expr import ONE, ZERO, Const, SymbolTable, add, differentiate, evaluate, is_zero, mul, normalize, parse, sub
from aef.geometry import MetricSpec, PotentialCandidate, VectorField, faraday, is_killing, killing_residual, metric_inverse
from aef.lie import (KillingBasis, StructureConstants, c_tilde, commutator, lambda_identity_residuals, lambda_matrix,
                     omega, omega_identity_residuals, recover_structure_constants, reduction_frame)

from strategies import TABLE, exprs

T = SymbolTable()


def P(s, table=T):
    return parse(s, table)


def vf(*comps, table=T):
    return VectorField(tuple(normalize(P(c, table)) for c in comps))


def flat():
    return MetricSpec(tuple(tuple(ONE if i == j else ZERO for j in range(4)) for i in range(4)))


# ---------------------------------------------------------------- metrics

def test_metric_must_be_symmetric():
    g = [[ZERO] * 4 for _ in range(4)]
    g[0][1] = ONE
    with pytest.raises(ValueError):
        MetricSpec(tuple(tuple(r) for r in g))


def test_inverse_is_certified():
    g = [[P("1"), ZERO, ZERO, ZERO], [ZERO, P("u3^2"), P("u3"), ZERO],
         [ZERO, P("u3"), P("2"), ZERO], [ZERO, ZERO, ZERO, P("exp(u1)")]]
    gi = metric_inverse(MetricSpec(tuple(map(tuple, g))), T)
    assert is_zero(sub(gi[1][1], P("2/u3^2")), T)
    assert is_zero(sub(gi[3][3], P("exp(-u1)")), T)


def test_singular_metric_is_reported():
    g = [[P("u1"), P("u1"), ZERO, ZERO], [P("u1"), P("u1"), ZERO, ZERO],
         [ZERO, ZERO, ONE, ZERO], [ZERO, ZERO, ZERO, ONE]]
    with pytest.raises(SingularMetric):
        metric_inverse(MetricSpec(tuple(map(tuple, g))), T)


def test_translations_and_rotation_are_killing_for_flat_metric():
    gi = metric_inverse(flat(), T)
    for xi in (vf("1", "0", "0", "0"), vf("0", "u2", "-u1", "0")):
        assert is_killing(gi, xi, T) == (True, None)


def test_dilation_is_not_killing_and_witness_checks_out():
    gi = metric_inverse(flat(), T)
    xi = vf("u0", "u1", "u2", "u3")
    ok, w = is_killing(gi, xi, T)
    assert not ok
    i, j = w["entry"]
    res = killing_residual(gi, xi, T)[i][j]
    assert abs(evaluate(res, w["point"])) > 1e-6


@given(exprs)
def test_faraday_is_gauge_invariant(chi):
    A = PotentialCandidate((P("u1*u2"), P("sin(u3)"), ZERO, P("u0^2")))
    B = PotentialCandidate(tuple(normalize(add(a, differentiate(chi, c))) for a, c in zip(A.A, T.coordinates)))
    F, G = faraday(A, TABLE), faraday(B, TABLE)
    for i in range(4):
        for j in range(4):
            assert is_zero(sub(F[i][j], G[i][j]), TABLE)


def test_faraday_is_antisymmetric():
    F = faraday(PotentialCandidate((P("u1"), P("u0*u2"), P("u3^2"), P("u1*u2"))), T)
    assert all(is_zero(add(F[i][j], F[j][i]), T) for i in range(4) for j in range(4))


# ---------------------------------------------------------------- brackets and structure constants

def so3_basis():
    # rotations of (u1, u2, u3) plus a translation in u0 as the dependent operator
    return KillingBasis((vf("0", "0", "-u3", "u2"), vf("0", "u3", "0", "-u1"), vf("0", "-u2", "u1", "0"),
                         vf("1", "0", "0", "0")))


def test_commutator_of_coordinate_fields_vanishes():
    assert all(x == ZERO for x in commutator(vf("1", "0", "0", "0"), vf("0", "1", "0", "0"), T).components)


def test_commutator_is_antisymmetric():
    x, y = vf("0", "u2", "u1^2", "0"), vf("0", "1", "u3", "u1")
    a, b = commutator(x, y, T), commutator(y, x, T)
    assert all(normalize(add(p, q)) == ZERO for p, q in zip(a.components, b.components))


def test_rotations_with_a_translation_do_not_close():
    basis = so3_basis()
    basis = KillingBasis(basis.xi[:3] + (vf("0", "1", "0", "0"),))
    with pytest.raises(NotClosed):
        recover_structure_constants(basis, T)


def test_recover_structure_constants_for_a_solvable_algebra():
    # X1 = p1, X2 = p2, X3 = u2 p1 + p3 (Heisenberg-like), X4 = u1 p1 + u2 p2 (dilation-like)
    basis = KillingBasis((vf("0", "1", "0", "0"), vf("0", "0", "1", "0"), vf("0", "u2", "0", "1"),
                          vf("0", "u1", "u2", "0")))
    C = recover_structure_constants(basis, T)
    for a in range(4):
        for b in range(a + 1, 4):
            br = commutator(basis[a], basis[b], T)
            for i in range(4):
                rhs = add(*(mul(C(d, a, b), basis[d][i]) for d in range(4)))
                assert is_zero(sub(br[i], rhs), T)
    assert all(r == ZERO or is_zero(r, T) for _, r in C.jacobi_residuals())


def test_from_entries_completes_antisymmetry_and_rejects_conflicts():
    C = StructureConstants.from_entries({(0, 1, 2): Const(3)})
    assert C(0, 2, 1) == Const(-3)
    with pytest.raises(ValueError):
        StructureConstants.from_entries({(0, 1, 2): Const(3), (0, 2, 1): Const(3)})


def test_structure_constant_json_is_one_based():
    C = StructureConstants.from_entries({(3, 0, 1): Const(-1)})
    assert C.to_json() == {"12": {"4": "-1"}}


def test_jacobi_fails_for_inconsistent_constants():
    # [X1,X2] = X3, [X1,X3] = X1 gives [X2,[X3,X1]] = X3
    C = StructureConstants.from_entries({(2, 0, 1): ONE, (0, 0, 2): ONE})
    assert any(not is_zero(r, T) for _, r in C.jacobi_residuals())


# ---------------------------------------------------------------- reduction frame

def test_lambda_inverts_the_independent_block():
    basis = KillingBasis((vf("0", "1", "0", "0"), vf("0", "0", "1", "0"), vf("0", "u2", "0", "1"),
                          vf("0", "0", "u2", "0")))
    lam = lambda_matrix(basis, T)
    assert is_zero(sub(lam[2][0], P("-u2")), T)


def test_degenerate_block_is_reported():
    basis = KillingBasis((vf("0", "1", "0", "0"), vf("0", "2", "0", "0"), vf("0", "0", "0", "1"),
                          vf("0", "0", "1", "0")))
    with pytest.raises(DegenerateBlock):
        lambda_matrix(basis, T)


def test_dependent_operator_must_lie_in_the_span():
    basis = KillingBasis((vf("0", "1", "0", "0"), vf("0", "0", "1", "0"), vf("0", "0", "0", "1"),
                          vf("1", "0", "0", "0")))
    with pytest.raises(InconsistentDependentOperator):
        omega(basis, lambda_matrix(basis, T), T)


def test_frame_identities_hold_for_a_nonabelian_example():
    basis = KillingBasis((vf("0", "1", "0", "0"), vf("0", "0", "1", "0"), vf("0", "u2", "0", "1"),
                          vf("0", "u3", "0", "0")))
    C = recover_structure_constants(basis, T)
    fr = reduction_frame(basis, C, T)
    for r in lambda_identity_residuals(basis, fr, T) + omega_identity_residuals(basis, fr, T):
        assert is_zero(r, T)


def test_c_tilde_adds_the_dependent_part():
    C = StructureConstants.from_entries({(3, 0, 1): ONE, (0, 0, 1): Const(2)})
    ct = c_tilde(C, [P("u1"), ZERO, ZERO])
    assert is_zero(sub(ct[0][0][1], P("2 + u1")), T)
