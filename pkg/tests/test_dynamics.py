import numpy as np
import pytest

from aef.admissibility import LinearMomentumFunction, check_bracket_decomposition, contract
from aef.catalog import load_case
from aef.dynamics import (START_P, START_U, NumericCaseInstance, _specialize, conservation_report, halving_ratio,
                          instantiate, integrate)
from aef.errors import BlowUp, MetricDegeneration, NoPotential
from aef.expr import ONE, ZERO, Const, Coord, SymbolTable, add, compile_exprs, differentiate, mul, normalize, parse
from aef.geometry import PotentialCandidate, metric_inverse

T = SymbolTable()


def flat_instance(A=None):
    g = [[ONE if i == j else ZERO for j in range(4)] for i in range(4)]
    xi = [[ONE if i == k else ZERO for i in range(4)] for k in range(4)]
    return NumericCaseInstance.build("flat", T, g, xi, A)


def test_flat_metric_gives_straight_lines():
    traj = integrate(flat_instance(), dt=0.01, t_end=2.0)
    u = traj.states[:, :4]
    expected = np.asarray(START_U) + 2.0 * np.outer(traj.t, START_P)   # u' = dH/dp = 2p
    assert np.max(np.abs(u - expected)) < 1e-12
    assert np.max(np.abs(traj.states[:, 4:] - START_P)) == 0.0


def test_catalog_case_conserves_everything():
    traj = integrate(instantiate(load_case("3.1.1")), dt=1e-3, t_end=10.0)
    rep = conservation_report(traj, tol=1e-8)
    assert rep.passed, rep.to_json()


def test_constant_coefficient_charges_do_not_move():
    # X1 = p1, X2 = p2 and nothing depends on u1, u2
    traj = integrate(instantiate(load_case("3.1.1")), dt=1e-2, t_end=5.0)
    assert traj.drifts["X1"] == 0.0 and traj.drifts["X2"] == 0.0


def _perturbed(case):
    t = case.table
    A = list(case.printed_potential.A)
    A[2] = normalize(add(A[2], parse("u1", t)))
    return PotentialCandidate(tuple(A))


def test_perturbed_potential_breaks_a_named_charge():
    case = load_case("3.1.1")
    inst = instantiate(case, potential=_perturbed(case))
    rep = conservation_report(integrate(inst, dt=1e-3, t_end=10.0), tol=1e-8)
    assert not rep.passed
    violated = rep.to_json()["violated"]
    assert violated and all(v.startswith("X") for v in violated)
    assert max(e.drift for e in rep.failures()) > 1e-3


def test_initial_rate_of_a_broken_charge_matches_the_bracket():
    case = load_case("3.1.1")
    t = case.table
    A = _perturbed(case)
    inst = instantiate(case, potential=A)
    gi = metric_inverse(case.metric, t)
    fn = {k: parse(v, SymbolTable(coordinates=t.coordinates, parameters=t.parameters))
          for k, v in inst.functions.items()}
    y0 = np.concatenate([START_U, START_P])
    u, p = y0[:4], y0[4:]
    P = p + inst.potential(u)[0]
    for a in range(4):
        xi = case.killing[a]
        Y = LinearMomentumFunction(xi, normalize(mul(Const(-1), contract(xi, A.A))))
        lin = [e.residual for e in check_bracket_decomposition(gi, A, Y, t)["linear"].entries]
        f = compile_exprs([_specialize(e, inst.params, fn) for e in lin], [Coord(c) for c in t.coordinates], "lin")
        oracle = float(np.dot(np.asarray(f(*u), float), P))
        # chain rule on X = xi(u).p along the flow
        dy = inst.rhs(y0)
        h = 1e-6
        numeric = (inst.charges(y0 + h * dy)[a] - inst.charges(y0 - h * dy)[a]) / (2 * h)
        assert oracle == pytest.approx(numeric, rel=1e-6, abs=1e-8)


def test_gauge_shift_leaves_coordinates_and_charges_alone():
    case = load_case("3.1.2")
    t = case.table
    chi = parse("u0^2", t)
    B = PotentialCandidate(tuple(normalize(add(a, differentiate(chi, c)))
                                 for a, c in zip(case.printed_potential.A, t.coordinates)))
    ta = integrate(instantiate(case), dt=1e-2, t_end=3.0)
    shifted = np.asarray(START_P) - np.array([2 * START_U[0], 0, 0, 0])
    tb = integrate(instantiate(case, potential=B), p0=shifted, dt=1e-2, t_end=3.0)
    assert np.max(np.abs(ta.states[:, :4] - tb.states[:, :4])) < 1e-10
    assert np.max(np.abs(ta.H - tb.H)) < 1e-10
    assert np.max(np.abs(ta.X[:, 2:] - tb.X[:, 2:])) < 1e-10


def test_missing_potential_needs_the_free_flag():
    case = load_case("3.3.3-eps1")
    with pytest.raises(NoPotential):
        instantiate(case)
    rep = conservation_report(integrate(instantiate(case, free=True), dt=1e-3, t_end=2.0))
    assert rep.passed


def test_leaving_the_chart_is_reported():
    # with c = 0.3 the orbit of this case runs into g33 -> 0 near t = 3.1
    inst = instantiate(load_case("3.2.3"), params={"c": 0.3})
    with pytest.raises((BlowUp, MetricDegeneration)):
        integrate(inst, dt=1e-2, t_end=5.0)


def test_degenerate_start_is_reported():
    inst = instantiate(load_case("3.1.1"), functions={"a2": "u0"})
    with pytest.raises(MetricDegeneration):
        integrate(inst, u0=(0.0, 0.2, 0.3, 0.4))


def test_parameter_outside_its_set_is_rejected():
    with pytest.raises(ValueError):
        instantiate(load_case("3.1.1"), params={"e0": 0.5})


def test_adaptive_steps_agree_with_fixed_steps():
    inst = instantiate(load_case("3.1.4"))
    a = integrate(inst, dt=1e-2, t_end=2.0)
    b = integrate(inst, dt=1e-2, t_end=2.0, method="rk4-adaptive", local_tol=1e-13)
    assert np.max(np.abs(a.states[-1] - b.states[-1])) < 1e-8
    assert b.min_dt < 1e-2


def test_halving_ratio_is_fourth_order_for_a_smooth_case():
    _, _, r = halving_ratio(instantiate(load_case("3.2.3")), 0.01, 10.0)
    assert 12 <= r <= 20
