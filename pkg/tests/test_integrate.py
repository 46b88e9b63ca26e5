"""Integrator: stepper accuracy and order, blowup detection, the companion
linear flow, pointwise continuation, and the determinant-evolution residual.

Closed-form oracles: tanh(t) for z' + z^2 - 1 = 0, 1/(1-t) for z' = z^2,
exp(-2t) for the scalar linear comparison equation, plus exact linear flow
formulas for the scalar escape problem.
"""

import math

import numpy as np
import pytest

from riccati.errors import StepOverflowError
from riccati.integrate import (BLOWUP, COMPLETED, STEP_UNDERFLOW,
                               IntegratorOptions, adaptive_simpson,
                               first_phi_singularity, integrate_linear_system,
                               integrate_lyapunov, integrate_riccati,
                               liouville_residual, radon_continue, step_rk)
from riccati.matrices import frobenius, hermiticity_defect
from riccati.problem import RiccatiProblem
from riccati.suite import blowup_problem, tanh_problem
from riccati.timefn import MatrixTimeFn


def make_const_problem(n, P, Q, R, S, horizon=10.0):
    return RiccatiProblem(n=n, P=MatrixTimeFn.constant(P),
                          Q=MatrixTimeFn.constant(Q),
                          R=MatrixTimeFn.constant(R),
                          S=MatrixTimeFn.constant(S),
                          t0=0.0, horizon=horizon)


# ---------------------------------------------------------------- step_rk

def test_step_zero_rhs_is_identity():
    prob = make_const_problem(2, *(np.zeros((2, 2)),) * 4)
    Z = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    Z1, err = step_rk(prob, 0.0, Z, 0.5)
    np.testing.assert_allclose(Z1, Z)
    assert err == 0.0


def test_step_scalar_decay_closed_form():
    # z' = -z via Q = 1: one step from z = 1 lands near e^{-0.1}.
    prob = make_const_problem(1, [[0.0]], [[1.0]], [[0.0]], [[0.0]])
    Z1, err = step_rk(prob, 0.0, np.array([[1.0]], dtype=complex), 0.1)
    assert abs(Z1[0, 0] - math.exp(-0.1)) <= 1e-8
    assert err < 1e-8


def test_step_error_estimate_order():
    # Embedded estimate scales like h^5: halving h divides it by ~32.
    prob = tanh_problem(1)
    Z = np.array([[0.3]], dtype=complex)
    ratios = []
    for h in (0.2, 0.1, 0.05):
        _, e1 = step_rk(prob, 0.0, Z, h)
        _, e2 = step_rk(prob, 0.0, Z, h / 2)
        ratios.append(e1 / e2)
    assert any(32 * 0.8 <= r <= 32 * 1.2 for r in ratios), ratios


def test_step_overflow_flagged():
    prob = blowup_problem()
    with pytest.raises(StepOverflowError):
        step_rk(prob, 0.0, np.array([[1e200]], dtype=complex), 1.0)
    with pytest.raises(StepOverflowError):
        step_rk(prob, 0.0, np.array([[np.nan]], dtype=complex), 0.1)


# ------------------------------------------------------- integrate_riccati

def test_tanh_closed_form():
    traj = integrate_riccati(tanh_problem(1, 10.0), np.zeros((1, 1)))
    assert traj.status == COMPLETED
    assert abs(traj.eval(1.0)[0, 0] - 0.7615941559557649) <= 1e-7
    for t in (1.0, 5.0, 10.0):
        assert abs(traj.eval(t)[0, 0] - math.tanh(t)) <= 1e-7


def test_blowup_detection_escape_time():
    traj = integrate_riccati(blowup_problem(1.2), np.ones((1, 1)))
    assert traj.status == BLOWUP
    assert 0.999 <= traj.t_end <= 1.001
    assert traj.t_escape == traj.t_end
    # last sample actually exceeded the norm threshold
    assert traj.diagnostics[-1].fro_norm >= 1e8
    # closed form along the way: z(t) = 1/(1-t)
    for t in (0.2, 0.5, 0.9):
        assert abs(traj.eval(t)[0, 0] - 1.0 / (1.0 - t)) <= 1e-6


def test_matrix_tanh_decouples():
    traj = integrate_riccati(tanh_problem(2, 5.0), np.zeros((2, 2)))
    assert traj.status == COMPLETED
    Z5 = traj.eval(5.0)
    np.testing.assert_allclose(Z5, math.tanh(5.0) * np.eye(2), atol=1e-7)


def test_large_but_finite_is_not_blowup():
    # Solution grows linearly to 100: far from the threshold conjunction.
    prob = make_const_problem(1, [[0.0]], [[0.0]], [[0.0]], [[-1.0]],
                              horizon=100.0)
    traj = integrate_riccati(prob, np.zeros((1, 1)))
    assert traj.status == COMPLETED
    assert traj.eval(100.0)[0, 0] == pytest.approx(100.0, rel=1e-9)


def test_step_underflow_status_on_stiff_floor():
    # Forcing h_min above the stability limit of an explicit method on a
    # fast linear decay must end in STEP_UNDERFLOW, not BLOWUP.
    prob = make_const_problem(1, [[0.0]], [[4000.0]], [[0.0]], [[0.0]],
                              horizon=10.0)
    opts = IntegratorOptions(h_min=2e-3, h_init=0.5)
    traj = integrate_riccati(prob, np.ones((1, 1)), opts)
    assert traj.status == STEP_UNDERFLOW
    assert traj.diagnostics[-1].fro_norm < 10.0


def test_trajectory_sampling_contract():
    traj = integrate_riccati(tanh_problem(1, 3.0), np.zeros((1, 1)),
                             IntegratorOptions(sample_dt=0.25))
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(3.0)
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.diagnostics) == len(traj.times)
    assert all(d.step_size > 0 for d in traj.diagnostics)


# ------------------------------------------------- integrate_linear_system

def test_linear_flow_trivial():
    prob = make_const_problem(2, *(np.zeros((2, 2)),) * 4)
    Z0 = np.array([[1.0, 1j], [0.0, 2.0]])
    flow = integrate_linear_system(prob, Z0)
    for t in (0.0, 3.0, 10.0):
        Phi, Psi = flow.phi_psi(t)
        np.testing.assert_allclose(Phi, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(Psi, Z0, atol=1e-12)


def test_linear_flow_scalar_escape_closed_form():
    flow = integrate_linear_system(blowup_problem(1.2), np.ones((1, 1)))
    for t in (0.0, 0.5, 1.0, 1.2):
        Phi, Psi = flow.phi_psi(t)
        assert Phi[0, 0] == pytest.approx(1.0 - t, abs=1e-10)
        assert Psi[0, 0] == pytest.approx(1.0, abs=1e-10)
    # determinant samples track 1 - t
    k = np.searchsorted(flow.times, 0.5)
    assert flow.detPhi[k] == pytest.approx(1.0 - flow.times[k], abs=1e-10)


def test_cross_method_agreement_tanh():
    prob = tanh_problem(1, 5.0)
    traj = integrate_riccati(prob, np.zeros((1, 1)))
    flow = integrate_linear_system(prob, np.zeros((1, 1)))
    for t in np.linspace(0.0, 5.0, 26):
        rv = radon_continue(flow, float(t))
        assert not rv.singular
        Z = traj.eval(float(t))
        assert frobenius(rv.value - Z) <= 1e-6 * (1 + frobenius(Z))


def test_linear_flow_superposition():
    prob = make_const_problem(2, np.eye(2), [[0, 1], [-1, 0]],
                              [[0, -1], [1, 0]], -np.eye(2), horizon=4.0)
    rng = np.random.default_rng(3)
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    alpha, beta = 0.3, 0.7  # affine so Phi(0) = I is preserved
    # Tight settings so integration/interpolation error sits below the
    # 1e-9 linearity bound being asserted.
    opts = IntegratorOptions(rtol=1e-12, atol=1e-12, h_max=0.02)
    fa = integrate_linear_system(prob, A, opts)
    fb = integrate_linear_system(prob, B, opts)
    fc = integrate_linear_system(prob, alpha * A + beta * B, opts)
    for t in np.linspace(0.0, 4.0, 9):
        Pa, Sa = fa.phi_psi(float(t))
        Pb, Sb = fb.phi_psi(float(t))
        Pc, Sc = fc.phi_psi(float(t))
        scale = 1 + frobenius(Pc) + frobenius(Sc)
        assert frobenius(alpha * Pa + beta * Pb - Pc) <= 1e-9 * scale
        assert frobenius(alpha * Sa + beta * Sb - Sc) <= 1e-9 * scale


# ---------------------------------------------------------- radon_continue

def test_radon_at_start_returns_initial_value():
    Z0 = np.array([[2.0, 1.0], [0.0, 1.0]], dtype=complex)
    prob = make_const_problem(2, np.eye(2), np.zeros((2, 2)),
                              np.zeros((2, 2)), -np.eye(2), horizon=2.0)
    flow = integrate_linear_system(prob, Z0)
    rv = radon_continue(flow, 0.0)
    np.testing.assert_allclose(rv.value, Z0, atol=1e-12)


def test_radon_scalar_escape_values_and_singularity():
    flow = integrate_linear_system(blowup_problem(1.2), np.ones((1, 1)))
    rv = radon_continue(flow, 0.5)
    assert not rv.singular
    assert abs(rv.value[0, 0] - 2.0) <= 1e-8
    rv1 = radon_continue(flow, 1.0)
    assert rv1.singular


def test_first_phi_singularity_locates_escape():
    flow = integrate_linear_system(blowup_problem(1.2), np.ones((1, 1)))
    t_sing = first_phi_singularity(flow)
    assert t_sing is not None
    assert abs(t_sing - 1.0) <= 1e-3


def test_first_phi_singularity_none_for_global_solution():
    flow = integrate_linear_system(tanh_problem(1, 5.0), np.zeros((1, 1)))
    assert first_phi_singularity(flow) is None


def test_escape_time_consistency_blowup_vs_singularity():
    prob = blowup_problem(1.2)
    traj = integrate_riccati(prob, np.ones((1, 1)))
    flow = integrate_linear_system(prob, np.ones((1, 1)))
    t_sing = first_phi_singularity(flow)
    assert abs(traj.t_end - t_sing) <= 1e-3


# ------------------------------------------------------ liouville_residual

def test_liouville_trivial_problem():
    prob = make_const_problem(1, [[0.0]], [[0.0]], [[0.0]], [[0.0]],
                              horizon=3.0)
    traj = integrate_riccati(prob, np.zeros((1, 1)))
    flow = integrate_linear_system(prob, np.zeros((1, 1)))
    assert liouville_residual(prob, flow, traj, 2.0) <= 1e-12


def test_liouville_blowup_problem():
    prob = blowup_problem(1.2)
    traj = integrate_riccati(prob, np.ones((1, 1)))
    flow = integrate_linear_system(prob, np.ones((1, 1)))
    # det Phi(0.5) = 0.5 and exp(int_0^0.5 -1/(1-tau)) = 0.5
    Phi, _ = flow.phi_psi(0.5)
    assert Phi[0, 0] == pytest.approx(0.5, abs=1e-10)
    for t in (0.3, 0.5, 0.9):
        assert liouville_residual(prob, flow, traj, t) <= 1e-6


def test_liouville_tanh_problem():
    prob = tanh_problem(1, 5.0)
    traj = integrate_riccati(prob, np.zeros((1, 1)))
    flow = integrate_linear_system(prob, np.zeros((1, 1)))
    for t in (1.0, 2.5, 5.0):
        assert liouville_residual(prob, flow, traj, t) <= 1e-6


# ----------------------------------------------------- integrate_lyapunov

def test_lyapunov_linear_growth():
    A = MatrixTimeFn.zero(2)
    S = MatrixTimeFn.identity(2, -1.0)
    traj = integrate_lyapunov(A, S, np.zeros((2, 2)), 0.0, 5.0)
    np.testing.assert_allclose(traj.eval(3.0), 3.0 * np.eye(2), atol=1e-9)


def test_lyapunov_scalar_decay():
    A = MatrixTimeFn.identity(1)
    S = MatrixTimeFn.zero(1)
    # h_max caps the dense-output interpolation error (~h^4/384 * y'''')
    # below the 1e-9 bound at off-node evaluation points.
    traj = integrate_lyapunov(A, S, np.ones((1, 1)), 0.0, 4.0,
                              IntegratorOptions(h_max=0.01))
    for t in (0.5, 2.0, 4.0):
        assert traj.eval(t)[0, 0] == pytest.approx(math.exp(-2 * t), abs=1e-9)


def test_lyapunov_preserves_hermitian():
    rng = np.random.default_rng(77)
    Araw = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Sraw = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Sherm = Sraw + np.conj(Sraw.T)
    Z0raw = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Z0 = Z0raw @ np.conj(Z0raw.T)
    traj = integrate_lyapunov(MatrixTimeFn.constant(Araw),
                              MatrixTimeFn.constant(Sherm), Z0, 0.0, 3.0)
    for t in (1.0, 3.0):
        assert hermiticity_defect(traj.eval(t)) <= 1e-10


# -------------------------------------------------------- adaptive_simpson

def test_adaptive_simpson_polynomial_exact():
    val = adaptive_simpson(lambda t: t ** 3, 0.0, 2.0)
    assert val == pytest.approx(4.0, abs=1e-12)


def test_adaptive_simpson_complex_and_breakpoints():
    g = lambda t: (1.0 if t < 1.0 else 2.0) + 1j * t
    val = adaptive_simpson(g, 0.0, 2.0, breakpoints=(1.0,))
    assert val == pytest.approx(3.0 + 2.0j, abs=1e-9)


# ----------------------------------------------------------- breakpoints

def test_breakpoints_are_step_endpoints():
    # S jumps at t = 1; accuracy across the seam stays at tolerance.
    from riccati import timefn as tf
    S = MatrixTimeFn.from_pieces(
        1, [[[[tf.const(-1.0)]]], [[[tf.const(-3.0)]]]], [1.0])
    prob = RiccatiProblem(n=1, P=MatrixTimeFn.zero(1), Q=MatrixTimeFn.zero(1),
                          R=MatrixTimeFn.zero(1), S=S, t0=0.0, horizon=2.0)
    traj = integrate_riccati(prob, np.zeros((1, 1)))
    # z' = 1 before the seam and 3 after it
    assert traj.eval(1.0)[0, 0] == pytest.approx(1.0, abs=1e-10)
    assert traj.eval(2.0)[0, 0] == pytest.approx(4.0, abs=1e-10)
    assert any(abs(seg.t1 - 1.0) < 1e-12 for seg in traj.dense.segments)
