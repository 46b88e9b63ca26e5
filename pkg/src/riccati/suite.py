"""Bundled example problems: a certified suite exercising every certificate
regime (time-varying U, nonzero Lambda, non-Hermitian sources, the U = P*
construction), plus the classic closed-form problems used as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import timefn as tf
from .certify import STRICT, p_adjoint_certificate
from .problem import Certificate, RiccatiProblem
from .timefn import MatrixTimeFn


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    description: str
    problem: RiccatiProblem
    certificate: Certificate
    Z0: np.ndarray
    expected_class: str
    # True when P is PSD Hermitian, S is NSD Hermitian and R = Q*, so the
    # linear-majorant sandwich applies and the identity certificate must pass.
    comparison_regime: bool


def tanh_problem(n: int = 1, horizon: float = 10.0) -> RiccatiProblem:
    """Z' + Z^2 - I = 0; from Z0 = 0 the solution is tanh(t) I."""
    return RiccatiProblem(n=n,
                          P=MatrixTimeFn.identity(n),
                          Q=MatrixTimeFn.zero(n),
                          R=MatrixTimeFn.zero(n),
                          S=MatrixTimeFn.identity(n, -1.0),
                          t0=0.0, horizon=horizon)


def blowup_problem(horizon: float = 1.2) -> RiccatiProblem:
    """z' - z^2 = 0; from z0 = 1 the solution 1/(1-t) escapes at t = 1."""
    return RiccatiProblem(n=1,
                          P=MatrixTimeFn.identity(1, -1.0),
                          Q=MatrixTimeFn.zero(1),
                          R=MatrixTimeFn.zero(1),
                          S=MatrixTimeFn.zero(1),
                          t0=0.0, horizon=horizon)


def _identity_cert(n: int) -> Certificate:
    return Certificate(U=MatrixTimeFn.identity(n), Lam=MatrixTimeFn.zero(n),
                       mu=MatrixTimeFn.zero(1))


def _entry_scalar_settling() -> SuiteEntry:
    prob = tanh_problem(1, horizon=50.0)
    return SuiteEntry(
        name="scalar_settling",
        description="z' + z^2 - 1 = 0; solution climbs to the stable root 1",
        problem=prob, certificate=_identity_cert(1),
        Z0=np.array([[0.25]], dtype=complex),
        expected_class=STRICT, comparison_regime=True)


def _entry_diagonal_settling() -> SuiteEntry:
    prob = tanh_problem(2, horizon=50.0)
    return SuiteEntry(
        name="diagonal_settling",
        description="matrix form of the settling problem, mixed initial gaps",
        problem=prob, certificate=_identity_cert(2),
        Z0=np.diag([0.25, 2.0]).astype(complex),
        expected_class=STRICT, comparison_regime=True)


def _entry_rotating_source() -> SuiteEntry:
    Q = MatrixTimeFn.constant([[0, 1], [-1, 0]])
    S = MatrixTimeFn.constant([[-1, 1], [-1, -1]])
    prob = RiccatiProblem(n=2, P=MatrixTimeFn.identity(2), Q=Q,
                          R=Q.adjoint(), S=S, t0=0.0, horizon=50.0)
    return SuiteEntry(
        name="rotating_source",
        description="non-Hermitian source with NSD Hermitian part; outside "
                    "the sandwich regime but certifiable",
        problem=prob, certificate=_identity_cert(2),
        Z0=np.eye(2, dtype=complex),
        expected_class=STRICT, comparison_regime=False)


def _entry_adjoint_weighted() -> SuiteEntry:
    P = MatrixTimeFn.constant(np.diag([2.0, 1.0]))
    prob = RiccatiProblem(n=2, P=P, Q=MatrixTimeFn.zero(2),
                          R=MatrixTimeFn.zero(2),
                          S=MatrixTimeFn.constant(np.diag([-2.0, -1.0])),
                          t0=0.0, horizon=50.0)
    cert = p_adjoint_certificate(prob)
    return SuiteEntry(
        name="adjoint_weighted",
        description="U = P* with a non-identity invertible P",
        problem=prob, certificate=cert,
        Z0=np.diag([0.5, 2.0]).astype(complex),
        expected_class=STRICT, comparison_regime=True)


def _entry_decaying_gain() -> SuiteEntry:
    P = MatrixTimeFn.scalar(tf.exp(1.0, -1.0))
    prob = RiccatiProblem(n=1, P=P, Q=MatrixTimeFn.zero(1),
                          R=MatrixTimeFn.zero(1),
                          S=MatrixTimeFn.identity(1, -1.0),
                          t0=0.0, horizon=50.0)
    return SuiteEntry(
        name="decaying_gain",
        description="quadratic gain e^{-t} fades; the solution grows linearly "
                    "but never escapes",
        problem=prob, certificate=_identity_cert(1),
        Z0=np.array([[1.0]], dtype=complex),
        expected_class=STRICT, comparison_regime=True)


def _entry_oscillating_drift() -> SuiteEntry:
    Q = MatrixTimeFn.from_entries(2, [
        [[], [tf.sin(1.0, 1.0)]],
        [[tf.sin(-1.0, 1.0)], []],
    ])
    R = Q.adjoint() + MatrixTimeFn.identity(2)
    prob = RiccatiProblem(n=2, P=MatrixTimeFn.identity(2), Q=Q, R=R,
                          S=MatrixTimeFn.identity(2, -1.0),
                          t0=0.0, horizon=50.0)
    cert = Certificate(U=MatrixTimeFn.identity(2), Lam=MatrixTimeFn.zero(2),
                       mu=MatrixTimeFn.identity(1))
    return SuiteEntry(
        name="oscillating_drift",
        description="sinusoidal skew drift, nonzero multiplier mu = 1",
        problem=prob, certificate=cert,
        Z0=np.eye(2, dtype=complex),
        expected_class=STRICT, comparison_regime=False)


def _entry_shrinking_floor() -> SuiteEntry:
    prob = tanh_problem(1, horizon=50.0)
    Lam = MatrixTimeFn.scalar(tf.exp(0.5, -1.0))
    cert = Certificate(U=MatrixTimeFn.identity(1), Lam=Lam,
                       mu=MatrixTimeFn.zero(1))
    return SuiteEntry(
        name="shrinking_floor",
        description="time-varying Lambda = e^{-t}/2 lowers the certified "
                    "floor as the solution settles",
        problem=prob, certificate=cert,
        Z0=np.array([[0.6]], dtype=complex),
        expected_class=STRICT, comparison_regime=True)


def _entry_exponential_gauge() -> SuiteEntry:
    P = MatrixTimeFn.scalar(tf.exp(1.0, -1.0))
    prob = RiccatiProblem(n=1, P=P, Q=MatrixTimeFn.zero(1),
                          R=MatrixTimeFn.identity(1),
                          S=MatrixTimeFn.identity(1, -1.0),
                          t0=0.0, horizon=50.0)
    cert = Certificate(U=MatrixTimeFn.scalar(tf.exp(1.0, 1.0)),
                       Lam=MatrixTimeFn.zero(1), mu=MatrixTimeFn.zero(1))
    return SuiteEntry(
        name="exponential_gauge",
        description="U = e^t balances a decaying gain against a constant "
                    "drift; exercises the U' term",
        problem=prob, certificate=cert,
        Z0=np.array([[1.0]], dtype=complex),
        expected_class=STRICT, comparison_regime=False)


def _entry_skew_source_boundary() -> SuiteEntry:
    S = MatrixTimeFn.constant([[0, 2], [-2, 0]])
    prob = RiccatiProblem(n=2, P=MatrixTimeFn.identity(2),
                          Q=MatrixTimeFn.zero(2), R=MatrixTimeFn.zero(2),
                          S=S, t0=0.0, horizon=50.0)
    return SuiteEntry(
        name="skew_source_boundary",
        description="skew source: S + S* = 0 exactly, the dissipativity "
                    "boundary case",
        problem=prob, certificate=_identity_cert(2),
        Z0=np.eye(2, dtype=complex),
        expected_class=STRICT, comparison_regime=False)


def certified_suite() -> list[SuiteEntry]:
    """All bundled certified problems (horizon 50, strict initial cone)."""
    return [
        _entry_scalar_settling(),
        _entry_diagonal_settling(),
        _entry_rotating_source(),
        _entry_adjoint_weighted(),
        _entry_decaying_gain(),
        _entry_oscillating_drift(),
        _entry_shrinking_floor(),
        _entry_exponential_gauge(),
        _entry_skew_source_boundary(),
    ]


def suite_entry(name: str) -> SuiteEntry:
    for entry in certified_suite():
        if entry.name == name:
            return entry
    raise KeyError(f"no bundled problem named {name!r}")
