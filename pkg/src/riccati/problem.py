"""Problem and certificate data model, and the change of variables
Z = U(t) (L + Lambda(t)) that reduces the quadratic matrix ODE

    Z' + Z P(t) Z + Q(t) Z + Z R(t) + S(t) = 0

to an equation of the same shape for L with coefficients (P U, Q_t, R_t, S_t).
The transformed coefficients are evaluated on demand from closures; products
of basis terms generally leave the symbolic basis, so nothing is expanded
symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError
from .matrices import DEFAULT_TOL, as_matrix, inverse, rcond_estimate
from .timefn import MatrixTimeFn

# Certificate-side invertibility floor for U(t) on the check grid.
CERT_RCOND_FLOOR = 1e-10


@dataclass(frozen=True)
class RiccatiProblem:
    """Coefficients (P, Q, R, S) on [t0, horizon], all n x n."""

    n: int
    P: MatrixTimeFn
    Q: MatrixTimeFn
    R: MatrixTimeFn
    S: MatrixTimeFn
    t0: float = 0.0
    horizon: float = 10.0

    def __post_init__(self):
        for name in ("P", "Q", "R", "S"):
            fn = getattr(self, name)
            if fn.n != self.n:
                raise ValueError(f"{name} has dimension {fn.n}, expected {self.n}")
        if not self.horizon > self.t0:
            raise ValueError("horizon must exceed t0")

    def breakpoints(self) -> list[float]:
        """Coefficient switching times inside (t0, horizon)."""
        bps = set()
        for fn in (self.P, self.Q, self.R, self.S):
            bps.update(fn.breakpoints)
        return sorted(b for b in bps if self.t0 < b < self.horizon)

    def rhs(self, t: float, Z: np.ndarray) -> np.ndarray:
        """Z' = -(Z P Z + Q Z + Z R + S) at time t."""
        P = self.P.eval(t)
        Q = self.Q.eval(t)
        R = self.R.eval(t)
        S = self.S.eval(t)
        return -(Z @ P @ Z + Q @ Z + Z @ R + S)

    def rhs_left(self, t: float, Z: np.ndarray) -> np.ndarray:
        """Like rhs but with left-limit coefficients at breakpoints."""
        P = self.P.eval_left(t)
        Q = self.Q.eval_left(t)
        R = self.R.eval_left(t)
        S = self.S.eval_left(t)
        return -(Z @ P @ Z + Q @ Z + Z @ R + S)


def rhs(prob: RiccatiProblem, t: float, Z: np.ndarray) -> np.ndarray:
    return prob.rhs(t, as_matrix(Z))


@dataclass(frozen=True)
class Certificate:
    """Global-existence certificate data (U, Lambda, mu) plus check settings.

    U must be invertible-valued on the check grid; mu may be omitted, in
    which case the drift-alignment check extracts it from the residual.
    ``grid_density`` is in points per unit time.
    """

    U: MatrixTimeFn
    Lam: MatrixTimeFn
    mu: MatrixTimeFn | None = None
    grid_density: float = 64.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.Lam.n != self.U.n:
            raise ValueError("U and Lambda dimensions differ")
        if self.mu is not None:
            if self.mu.n != 1:
                raise ValueError("mu must be 1x1")
            if not self.mu.has_real_coefficients():
                raise ValueError("mu must be real-valued")
        if self.grid_density <= 0 or self.tol <= 0:
            raise ValueError("grid_density and tol must be positive")

    @property
    def n(self) -> int:
        return self.U.n

    def check_grid(self, prob: RiccatiProblem) -> np.ndarray:
        """Uniform grid at grid_density over [t0, horizon], plus breakpoints."""
        span = prob.horizon - prob.t0
        count = max(2, int(round(span * self.grid_density)) + 1)
        ts = set(np.linspace(prob.t0, prob.horizon, count).tolist())
        for fn in (self.U, self.Lam, prob.P, prob.Q, prob.R, prob.S):
            ts.update(b for b in fn.breakpoints if prob.t0 <= b <= prob.horizon)
        if self.mu is not None:
            ts.update(b for b in self.mu.breakpoints
                      if prob.t0 <= b <= prob.horizon)
        return np.array(sorted(ts))

    def u_inverse(self, t: float) -> tuple[np.ndarray, np.ndarray, float]:
        """(U(t), U(t)^{-1}, rcond); raises SingularMatrixError("U") below floor."""
        Ut = self.U.eval(t)
        rc = rcond_estimate(Ut)
        if rc < CERT_RCOND_FLOOR:
            raise SingularMatrixError("U", t, rc)
        Uinv, _ = inverse(Ut, what="U", t=t)
        return Ut, Uinv, rc


def identity_certificate(n: int, grid_density: float = 64.0,
                         tol: float = DEFAULT_TOL) -> Certificate:
    """The (U, Lambda, mu) = (I, 0, 0) certificate."""
    return Certificate(U=MatrixTimeFn.identity(n), Lam=MatrixTimeFn.zero(n),
                       mu=MatrixTimeFn.zero(1), grid_density=grid_density, tol=tol)


def s_ul(cert: Certificate, prob: RiccatiProblem, t: float) -> np.ndarray:
    """Transformed source term:

    Lam' + Lam P U Lam + [U^{-1} U' + U^{-1} Q U] Lam + Lam R + U^{-1} S.
    """
    _, Uinv, _ = cert.u_inverse(t)
    Ut = cert.U.eval(t)
    dU = cert.U.deriv(t)
    Lam = cert.Lam.eval(t)
    dLam = cert.Lam.deriv(t)
    P = prob.P.eval(t)
    Q = prob.Q.eval(t)
    R = prob.R.eval(t)
    S = prob.S.eval(t)
    return (dLam + Lam @ P @ Ut @ Lam
            + (Uinv @ dU + Uinv @ Q @ Ut) @ Lam
            + Lam @ R + Uinv @ S)


def q_ul(cert: Certificate, prob: RiccatiProblem, t: float) -> np.ndarray:
    """Transformed left coefficient: U^{-1} U' + U^{-1} Q U + Lam P U."""
    _, Uinv, _ = cert.u_inverse(t)
    Ut = cert.U.eval(t)
    dU = cert.U.deriv(t)
    Lam = cert.Lam.eval(t)
    P = prob.P.eval(t)
    Q = prob.Q.eval(t)
    return Uinv @ dU + Uinv @ Q @ Ut + Lam @ P @ Ut


def r_ul(cert: Certificate, prob: RiccatiProblem, t: float) -> np.ndarray:
    """Transformed right coefficient: R + P U Lam."""
    Ut = cert.U.eval(t)
    Lam = cert.Lam.eval(t)
    P = prob.P.eval(t)
    R = prob.R.eval(t)
    return R + P @ Ut @ Lam


def quad_coeff(cert: Certificate, prob: RiccatiProblem, t: float) -> np.ndarray:
    """Quadratic coefficient of the transformed equation: P(t) U(t)."""
    return prob.P.eval(t) @ cert.U.eval(t)


@dataclass(frozen=True)
class TransformedProblem:
    """On-demand view of the transformed equation's coefficients."""

    cert: Certificate
    prob: RiccatiProblem

    def a_coeff(self, t: float) -> np.ndarray:
        return quad_coeff(self.cert, self.prob, t)

    def q(self, t: float) -> np.ndarray:
        return q_ul(self.cert, self.prob, t)

    def r(self, t: float) -> np.ndarray:
        return r_ul(self.cert, self.prob, t)

    def s(self, t: float) -> np.ndarray:
        return s_ul(self.cert, self.prob, t)

    def residual(self, t: float, L: np.ndarray, dL: np.ndarray) -> np.ndarray:
        """L' + L (PU) L + Q_t L + L R_t + S_t evaluated with a supplied dL."""
        return (dL + L @ self.a_coeff(t) @ L + self.q(t) @ L
                + L @ self.r(t) + self.s(t))


def transform_solution(cert: Certificate, prob: RiccatiProblem, t: float,
                       Z: np.ndarray) -> np.ndarray:
    """L = U(t)^{-1} Z - Lambda(t)."""
    _, Uinv, _ = cert.u_inverse(t)
    return Uinv @ as_matrix(Z) - cert.Lam.eval(t)


def untransform_solution(cert: Certificate, prob: RiccatiProblem, t: float,
                         L: np.ndarray) -> np.ndarray:
    """Z = U(t) (L + Lambda(t))."""
    return cert.U.eval(t) @ (as_matrix(L) + cert.Lam.eval(t))
