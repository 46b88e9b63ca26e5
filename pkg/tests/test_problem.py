"""Problem data model and the certificate change of variables.

Oracles: an entrywise-summation expansion of the quadratic right-hand side,
an independently expanded form of the transformed source, and hand-evaluated
scalar cases.
"""

import math

import numpy as np
import pytest

from riccati import timefn as tf
from riccati.errors import SingularMatrixError
from riccati.matrices import frobenius
from riccati.problem import (Certificate, RiccatiProblem, TransformedProblem,
                             q_ul, r_ul, rhs, s_ul, transform_solution,
                             untransform_solution)
from riccati.timefn import MatrixTimeFn
from riccati.integrate import integrate_riccati


def make_problem(n, P, Q, R, S, t0=0.0, horizon=10.0):
    return RiccatiProblem(n=n,
                          P=MatrixTimeFn.constant(P),
                          Q=MatrixTimeFn.constant(Q),
                          R=MatrixTimeFn.constant(R),
                          S=MatrixTimeFn.constant(S),
                          t0=t0, horizon=horizon)


def rhs_expansion_oracle(P, Q, R, S, Z):
    """-(Z P Z + Q Z + Z R + S) by explicit index summation."""
    n = Z.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            acc = S[i, j]
            for k in range(n):
                acc += Q[i, k] * Z[k, j] + Z[i, k] * R[k, j]
                for m in range(n):
                    acc += Z[i, k] * P[k, m] * Z[m, j]
            out[i, j] = -acc
    return out


def identity_cert(n, Lam=None, mu=None):
    return Certificate(U=MatrixTimeFn.identity(n),
                       Lam=Lam if Lam is not None else MatrixTimeFn.zero(n),
                       mu=mu)


# ------------------------------------------------------------------ rhs

def test_rhs_zero_state_gives_minus_source():
    S = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    prob = make_problem(2, np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), S)
    np.testing.assert_allclose(rhs(prob, 0.3, np.zeros((2, 2))), -S)


def test_rhs_scalar_unit_source():
    prob = make_problem(1, [[1.0]], [[0.0]], [[0.0]], [[-1.0]])
    assert rhs(prob, 0.0, np.zeros((1, 1)))[0, 0] == pytest.approx(1.0)


def test_rhs_against_expansion_oracle():
    rng = np.random.default_rng(21)
    for _ in range(25):
        mats = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                for _ in range(5)]
        P, Q, R, S, Z = mats
        prob = make_problem(2, P, Q, R, S)
        got = rhs(prob, 1.0, Z)
        expected = rhs_expansion_oracle(P, Q, R, S, Z)
        assert frobenius(got - expected) <= 1e-12 * (1 + frobenius(expected))


# ------------------------------------------------------------------ s_ul

def test_s_ul_identity_certificate_is_source():
    S = np.array([[2.0, 1j], [0.0, -1.0]])
    prob = make_problem(2, np.eye(2), np.eye(2), np.eye(2), S)
    np.testing.assert_allclose(s_ul(identity_cert(2), prob, 0.7), S)


def test_s_ul_constant_shift_no_quadratic():
    Lam = np.array([[0.5, 0.0], [0.0, 2.0]], dtype=complex)
    R = np.array([[1.0, 1.0], [0.0, 3.0]], dtype=complex)
    S = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    prob = make_problem(2, np.zeros((2, 2)), np.zeros((2, 2)), R, S)
    cert = identity_cert(2, Lam=MatrixTimeFn.constant(Lam))
    np.testing.assert_allclose(s_ul(cert, prob, 1.1), Lam @ R + S)


def test_s_ul_exponential_gauge_hand_value():
    # U = e^t, Lambda = 0: the only surviving term is U^{-1} S = e^{-t} s0.
    s0 = -2.5
    prob = RiccatiProblem(n=1, P=MatrixTimeFn.zero(1), Q=MatrixTimeFn.zero(1),
                          R=MatrixTimeFn.zero(1),
                          S=MatrixTimeFn.constant([[s0]]),
                          t0=0.0, horizon=5.0)
    cert = Certificate(U=MatrixTimeFn.scalar(tf.exp(1.0, 1.0)),
                       Lam=MatrixTimeFn.zero(1))
    for t in (0.0, 1.0, 2.0):
        assert s_ul(cert, prob, t)[0, 0] == pytest.approx(math.exp(-t) * s0,
                                                          rel=1e-12)


def s_ul_expanded_oracle(cert, prob, t):
    """The same formula with products expanded in a different association."""
    Ut = cert.U.eval(t)
    Uinv = np.linalg.inv(Ut)
    dU = cert.U.deriv(t)
    Lam = cert.Lam.eval(t)
    dLam = cert.Lam.deriv(t)
    P, Q, R, S = (prob.P.eval(t), prob.Q.eval(t), prob.R.eval(t), prob.S.eval(t))
    return (dLam + (Lam @ P) @ (Ut @ Lam) + (Uinv @ dU) @ Lam
            + Uinv @ (Q @ (Ut @ Lam)) + Lam @ R + Uinv @ S)


def test_s_ul_two_evaluation_orders_agree():
    rng = np.random.default_rng(31)
    for _ in range(15):
        n = 2
        mats = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                for _ in range(4)]
        P, Q, R, S = mats
        prob = make_problem(n, P, Q, R, S)
        U = MatrixTimeFn.constant(rng.standard_normal((n, n))
                                  + 1j * rng.standard_normal((n, n))
                                  + 3 * np.eye(n))
        Lam = MatrixTimeFn.constant(rng.standard_normal((n, n)).astype(complex))
        cert = Certificate(U=U, Lam=Lam)
        a = s_ul(cert, prob, 0.9)
        b = s_ul_expanded_oracle(cert, prob, 0.9)
        assert frobenius(a - b) <= 1e-12 * (1 + frobenius(a))


# ------------------------------------------------------------ q_ul / r_ul

def test_q_r_ul_identity_certificate():
    Q = np.array([[1.0, 2.0], [0.0, 1j]])
    R = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    prob = make_problem(2, np.eye(2), Q, R, np.zeros((2, 2)))
    cert = identity_cert(2)
    np.testing.assert_allclose(q_ul(cert, prob, 0.2), Q)
    np.testing.assert_allclose(r_ul(cert, prob, 0.2), R)


def test_q_ul_constant_u_conjugation():
    U = np.array([[2.0, 1.0], [0.0, 1.0]], dtype=complex)
    Q = np.array([[1.0, 0.0], [1.0, 3.0]], dtype=complex)
    prob = make_problem(2, np.zeros((2, 2)), Q, np.zeros((2, 2)), np.zeros((2, 2)))
    cert = Certificate(U=MatrixTimeFn.constant(U), Lam=MatrixTimeFn.zero(2))
    np.testing.assert_allclose(q_ul(cert, prob, 1.0),
                               np.linalg.inv(U) @ Q @ U)


def test_q_r_ul_against_direct_reevaluation():
    rng = np.random.default_rng(41)
    n = 2
    P = rng.standard_normal((n, n)).astype(complex)
    Q = rng.standard_normal((n, n)).astype(complex)
    R = rng.standard_normal((n, n)).astype(complex)
    prob = make_problem(n, P, Q, R, np.zeros((n, n)))
    Umat = rng.standard_normal((n, n)) + 4 * np.eye(n)
    Lmat = rng.standard_normal((n, n))
    cert = Certificate(U=MatrixTimeFn.constant(Umat),
                       Lam=MatrixTimeFn.constant(Lmat))
    Uinv = np.linalg.inv(Umat)
    np.testing.assert_allclose(q_ul(cert, prob, 0.5),
                               Uinv @ Q @ Umat + Lmat @ P @ Umat, atol=1e-12)
    np.testing.assert_allclose(r_ul(cert, prob, 0.5),
                               R + P @ Umat @ Lmat, atol=1e-12)


# -------------------------------------------- transform / untransform

def test_transform_identity_certificate():
    prob = make_problem(2, np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)),
                        -np.eye(2))
    Z = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    np.testing.assert_allclose(
        transform_solution(identity_cert(2), prob, 0.0, Z), Z)


def test_transform_exact_cancellation():
    rng = np.random.default_rng(51)
    Umat = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    Lmat = rng.standard_normal((2, 2)).astype(complex)
    cert = Certificate(U=MatrixTimeFn.constant(Umat),
                       Lam=MatrixTimeFn.constant(Lmat))
    prob = make_problem(2, np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)),
                        -np.eye(2))
    Z = Umat @ Lmat
    L = transform_solution(cert, prob, 0.0, Z)
    assert frobenius(L) <= 1e-12 * (1 + frobenius(Z))


def test_transform_round_trip():
    rng = np.random.default_rng(61)
    for _ in range(10):
        Umat = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) \
            + 4 * np.eye(3)
        Lmat = rng.standard_normal((3, 3)).astype(complex)
        cert = Certificate(U=MatrixTimeFn.constant(Umat),
                           Lam=MatrixTimeFn.constant(Lmat))
        prob = make_problem(3, np.eye(3), np.zeros((3, 3)), np.zeros((3, 3)),
                            -np.eye(3))
        Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        back = untransform_solution(cert, prob, 0.0,
                                    transform_solution(cert, prob, 0.0, Z))
        assert frobenius(back - Z) <= 1e-12 * (1 + frobenius(Z))


def test_singular_u_raises():
    cert = Certificate(U=MatrixTimeFn.constant([[1.0, 0.0], [0.0, 0.0]]),
                       Lam=MatrixTimeFn.zero(2))
    prob = make_problem(2, np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)),
                        -np.eye(2))
    with pytest.raises(SingularMatrixError):
        transform_solution(cert, prob, 0.0, np.eye(2))
    with pytest.raises(SingularMatrixError):
        s_ul(cert, prob, 0.0)


# ---------------------------------------- transformed-equation residual

def test_transform_equivalence_on_certified_suite():
    """L(t) = U^{-1} Z - Lambda satisfies the transformed equation: the
    finite-difference residual on dense output stays below 1e-6 (1 + |L|^2).

    Residuals are evaluated at midpoints of accepted steps, where the cubic
    interpolant's derivative error cancels to leading order.
    """
    from riccati.integrate import IntegratorOptions
    from riccati.suite import certified_suite
    import dataclasses

    opts = IntegratorOptions(h_max=0.15)
    for entry in certified_suite():
        prob = dataclasses.replace(entry.problem, horizon=10.0)
        traj = integrate_riccati(prob, entry.Z0, opts)
        tp = TransformedProblem(entry.certificate, prob)
        checked = 0
        for seg in traj.dense.segments[::3]:
            h = seg.t1 - seg.t0
            if h < 4e-3:
                continue
            tm = 0.5 * (seg.t0 + seg.t1)
            d = min(1e-4, h / 4)
            Lp = transform_solution(entry.certificate, prob, tm + d,
                                    traj.dense.eval(tm + d))
            Lm = transform_solution(entry.certificate, prob, tm - d,
                                    traj.dense.eval(tm - d))
            L = transform_solution(entry.certificate, prob, tm,
                                   traj.dense.eval(tm))
            dL = (Lp - Lm) / (2 * d)
            res = frobenius(tp.residual(tm, L, dL))
            assert res <= 1e-6 * (1.0 + frobenius(L) ** 2), \
                f"{entry.name}: residual {res:.3e} at t={tm:.4f}"
            checked += 1
        assert checked >= 10
