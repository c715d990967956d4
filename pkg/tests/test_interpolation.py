import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sysinterp.discretization import discretize
from sysinterp.exceptions import InconsistentSystemError, InvalidArgumentError, NoInterpolatingModelError
from sysinterp.interpolation import (
    DELTA_MIN,
    MIN_NORM,
    build_inclusion_matrices,
    build_interpolating_input,
    check_interpolator,
    operator_matrix,
    parameter_matrix,
    solve_segment,
    verify_input_membership,
)
from sysinterp.legendre import build_operator_set, build_quadrature
from sysinterp.systems import CtLti, DiscreteSignal, DtLti, PiecewisePolySignal, ct_simulate, is_interpolation


@pytest.fixture
def scalar_integrator():
    return CtLti([[0.0]], [[1.0]]), build_operator_set(build_quadrature(1.0, 1))


def test_operator_matrix_n1(scalar_integrator):
    ct, ops = scalar_integrator
    np.testing.assert_allclose(
        operator_matrix(ct, ops), [[1.5, 0], [1.5, -1], [1.5, 0], [0, 1.5]], atol=1e-14
    )


def test_parameter_matrix_n1(scalar_integrator):
    ct, ops = scalar_integrator
    L = parameter_matrix(ct, ops)
    np.testing.assert_allclose(L[2], [0.5, 0.0, 0.0], atol=1e-14)
    # first row: A_c - dphi0(0) I, B_c, 0
    np.testing.assert_allclose(L[0], [1.5, 1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(L[3], [0.0, 0.5, 1.0], atol=1e-14)
    L2 = parameter_matrix(ct, ops, [[2.0]], [[3.0]])
    np.testing.assert_allclose(L2[2], [2.5, 3.0, 0.0], atol=1e-14)


def test_inclusion_matrix_shapes(double_integrator, reference_model, demo_scheme):
    L, R = build_inclusion_matrices(double_integrator, reference_model, build_operator_set(demo_scheme))
    n, m, N = 2, 1, 5
    assert R.shape == (n + n * N + n + m, n * N + m * N)
    assert L.shape == (R.shape[0], n + 2 * m)
    with pytest.raises(InvalidArgumentError):
        build_inclusion_matrices(double_integrator, DtLti(np.eye(3), np.ones((3, 1))), build_operator_set(demo_scheme))


def test_reference_pair_is_interpolated(double_integrator, reference_model, demo_scheme):
    rep = check_interpolator(double_integrator, reference_model, demo_scheme)
    assert rep.holds and rep.rank_agrees
    assert rep.relative_residual < 1e-12
    assert rep.to_dict()["holds"] is True


def test_frozen_system_interpolates_identity():
    ct = CtLti([[0.0]], [[0.0]])
    for N in (1, 3, 6):
        rep = check_interpolator(ct, DtLti([[1.0]], [[0.0]]), build_quadrature(0.5, N))
        assert rep.holds and rep.rank_agrees


def test_frozen_system_rejects_drift():
    ct = CtLti([[0.0]], [[0.0]])
    rep = check_interpolator(ct, DtLti([[2.0]], [[0.0]]), build_quadrature(0.5, 3))
    assert not rep.holds and rep.rank_agrees
    assert rep.worst_label == "x0[0]"


def test_hold_model_fails_at_degree_three(double_integrator):
    # a degree-3 state forces a linear input fixed by its endpoints, which cannot
    # bring an arbitrary state back to itself after tau
    rep = check_interpolator(double_integrator, DtLti(np.eye(2), np.zeros((2, 1))), build_quadrature(0.2, 3))
    assert not rep.holds and rep.rank_agrees
    rank, rows = oracles.double_integrator_return_rank(0.2, 3)
    assert rank < rows


def test_hold_model_verdict_agrees_with_monomial_oracle(double_integrator):
    for N in (2, 3, 4, 5, 6, 7):
        rank, rows = oracles.double_integrator_return_rank(0.2, N)
        rep = check_interpolator(double_integrator, DtLti(np.eye(2), np.zeros((2, 1))), build_quadrature(0.2, N))
        assert rep.holds == (rank == rows), N


def test_zero_rhs_gives_zero_solution(double_integrator, reference_model, demo_scheme):
    sol = solve_segment(double_integrator, reference_model, build_operator_set(demo_scheme), [0, 0], [0], [0])
    assert np.all(sol.X == 0) and np.all(sol.U == 0)
    assert sol.X.shape == (2, 5) and sol.U.shape == (1, 5) and sol.mode == MIN_NORM


def test_inconsistent_segment_raises(double_integrator, demo_scheme):
    ops = build_operator_set(build_quadrature(0.2, 3))
    hold = DtLti(np.eye(2), np.zeros((2, 1)))
    with pytest.raises(InconsistentSystemError):
        solve_segment(double_integrator, hold, ops, [0.0, 1.0], [0.0], [0.0])


def test_solve_segment_validates(double_integrator, reference_model, demo_scheme):
    ops = build_operator_set(demo_scheme)
    with pytest.raises(InvalidArgumentError):
        solve_segment(double_integrator, reference_model, ops, [0, 0], [0], [0], mode="fast")
    with pytest.raises(InvalidArgumentError):
        solve_segment(double_integrator, reference_model, ops, [0, 0, 0], [0], [0])


def _accepted_instance(rng, N, tau, attempts=200):
    # low degrees rarely admit an interpolated model for a random system
    for _ in range(attempts):
        A, B = oracles.random_system(rng)
        ct = CtLti(A, B)
        scheme = build_quadrature(tau, N)
        try:
            dt, _, _ = discretize(ct, scheme)
        except NoInterpolatingModelError:
            continue
        return ct, dt, scheme
    raise AssertionError(f"no accepted instance for N={N} in {attempts} draws")


def test_delta_min_never_worse_than_min_norm(rng):
    from sysinterp.bounds import build_delta

    checked = 0
    while checked < 5:
        ct, dt, scheme = _accepted_instance(rng, int(rng.integers(4, 6)), 0.3)
        ops = build_operator_set(scheme)
        x, u0, u1 = rng.normal(size=ct.n), rng.normal(size=ct.m), rng.normal(size=ct.m)
        a = solve_segment(ct, dt, ops, x, u0, u1, mode=MIN_NORM)
        if a.null_dim == 0:
            continue
        b = solve_segment(ct, dt, ops, x, u0, u1, mode=DELTA_MIN, scheme=scheme)
        delta = build_delta(ct, scheme)
        assert delta.seminorm(b.stacked) <= delta.seminorm(a.stacked) + 1e-9
        Q = operator_matrix(ct, ops)
        np.testing.assert_allclose(Q @ a.stacked, Q @ b.stacked, atol=1e-8 * (1 + np.abs(Q @ a.stacked).max()))
        checked += 1


def test_delta_min_needs_scheme(rng):
    ct = CtLti([[0.0]], [[1.0]])
    scheme = build_quadrature(0.5, 4)
    dt, _, free = discretize(ct, scheme)
    sol = solve_segment(ct, dt, build_operator_set(scheme), [0.0], [1.0], [1.0])
    assert sol.null_dim > 0
    with pytest.raises(InvalidArgumentError):
        solve_segment(ct, dt, build_operator_set(scheme), [0.0], [1.0], [1.0], mode=DELTA_MIN)


def test_zero_inputs_give_zero_signals(double_integrator, reference_model, demo_scheme):
    syn = build_interpolating_input(double_integrator, reference_model, demo_scheme, [0, 0], np.zeros((4, 1)))
    assert np.all(syn.u_c.segment_values == 0) and np.all(syn.x_pred.segment_values == 0)
    u_c, x_pred = syn
    assert verify_input_membership(double_integrator, reference_model, demo_scheme, [0, 0], np.zeros((4, 1)), u_c)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 5), st.sampled_from([MIN_NORM, DELTA_MIN]))
def test_synthesis_round_trip(seed, N, mode):
    rng = np.random.default_rng(seed)
    ct, dt, scheme = _accepted_instance(rng, N, float(rng.uniform(0.1, 0.5)))
    x0 = rng.normal(size=ct.n)
    u_d = DiscreteSignal(rng.normal(size=(4, ct.m)))
    syn = build_interpolating_input(ct, dt, scheme, x0, u_d, mode=mode)
    assert is_interpolation(syn.u_c, u_d)
    assert is_interpolation(syn.x_pred, syn.x_d)
    assert verify_input_membership(ct, dt, scheme, x0, u_d, syn.u_c)
    traj = ct_simulate(ct, x0, syn.u_c, 200)
    err = np.abs(traj.at_breakpoints() - syn.x_d.values) / np.maximum(1, np.abs(syn.x_d.values))
    assert err.max() < 1e-6


def test_predicted_state_solves_the_ode_at_nodes(double_integrator, reference_model, demo_scheme, rng):
    from sysinterp.legendre import phi_deriv

    u_d = rng.normal(size=(3, 1))
    syn = build_interpolating_input(double_integrator, reference_model, demo_scheme, [0.3, -0.2], u_d)
    s = demo_scheme
    D = np.array([phi_deriv(s, i, s.nodes) for i in range(s.N + 1)])  # D[i, j] = phi_i'(t_j)
    for seg in range(2):
        Xn = syn.x_pred.segment_values[seg]
        Un = syn.u_c.segment_values[seg]
        xdot = D.T @ Xn
        rhs = Xn @ double_integrator.A_c.T + Un @ double_integrator.B_c.T
        np.testing.assert_allclose(xdot, rhs, atol=1e-7 * (1 + np.abs(rhs).max()))


def test_perturbed_input_is_rejected(double_integrator, reference_model, demo_scheme, rng):
    u_d = DiscreteSignal(rng.normal(size=(3, 1)))
    syn = build_interpolating_input(double_integrator, reference_model, demo_scheme, [0, 0], u_d)
    assert all(seg.null_dim == 0 for seg in syn.segments)
    vals = syn.u_c.segment_values.copy()
    vals[1, 2, 0] += 1.0
    bad = PiecewisePolySignal(demo_scheme, vals)
    assert not verify_input_membership(double_integrator, reference_model, demo_scheme, [0, 0], u_d, bad)


def test_near_inconsistent_warning(monkeypatch, double_integrator):
    monkeypatch.setenv("SYSINTERP_INCLUSION_TOL", "1e-30")
    scheme = build_quadrature(0.2, 5)
    dt = DtLti(oracles.REFERENCE_A_D, oracles.REFERENCE_B_D)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sol = solve_segment(double_integrator, dt, build_operator_set(scheme), [1.0, 2.0], [3.0], [4.0])
    if sol.residual > 1e-30:
        assert sol.near_inconsistent and caught


def test_hold_model_is_realised_at_degree_five(double_integrator, rng):
    # at N = 5 a cubic input has two free coefficients after fixing its endpoints,
    # enough to return the double integrator to any starting state after tau
    scheme = build_quadrature(0.2, 5)
    hold = DtLti(np.eye(2), np.zeros((2, 1)))
    rank, rows = oracles.double_integrator_return_rank(0.2, 5)
    assert rank == rows
    x0 = rng.normal(size=2)
    u_d = DiscreteSignal(rng.normal(size=(3, 1)))
    syn = build_interpolating_input(double_integrator, hold, scheme, x0, u_d)
    x = x0
    for i in range(2):
        seg = lambda t, i=i: syn.u_c.segment_at(i, [t])[0]
        x = oracles.simulate_ivp(*oracles.DOUBLE_INTEGRATOR, x, seg, 0.2, [0.2])[-1]
        np.testing.assert_allclose(x, x0, atol=1e-8)
