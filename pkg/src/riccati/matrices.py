"""Dense complex matrix arithmetic, Hermitian eigendecomposition and
definiteness classification.

Matrices are plain ``numpy.ndarray`` values of dtype complex128 and shape
(n, n); every function validates squareness.  All operations are pure and
never mutate their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotHermitianError, SingularMatrixError

# Default relative tolerance for definiteness decisions; integration error
# dominates below this.
DEFAULT_TOL = 1e-9

# Reciprocal-condition threshold below which inversion is refused.
SINGULAR_RCOND = 1e-13

# Jacobi sweep targets.
_JACOBI_OFF_REL = 1e-14
_JACOBI_MAX_SWEEPS = 30

PD = "PD"
PSD = "PSD"
ND = "ND"
NSD = "NSD"
INDEFINITE = "INDEFINITE"
NOT_HERMITIAN = "NOT_HERMITIAN"


def as_matrix(values) -> np.ndarray:
    """Coerce to a square complex128 array, validating the shape."""
    M = np.asarray(values, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def frobenius(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, "fro"))


def adjoint(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(as_matrix(M).T)


def hermitian_part(M: np.ndarray) -> np.ndarray:
    """(M + M*) / 2.  Hermitian to machine precision."""
    M = as_matrix(M)
    return 0.5 * (M + np.conj(M.T))


def doubled_hermitian_part(M: np.ndarray) -> np.ndarray:
    """M + M*, unhalved; the form used by the certificate checks."""
    M = as_matrix(M)
    return M + np.conj(M.T)


def trace(M: np.ndarray) -> complex:
    return complex(np.trace(as_matrix(M)))


def hermiticity_defect(M: np.ndarray) -> float:
    """Relative departure from Hermitian symmetry: ||M - M*||_F / (1 + ||M||_F)."""
    M = as_matrix(M)
    return frobenius(M - np.conj(M.T)) / (1.0 + frobenius(M))


def inverse(M: np.ndarray, what: str = "M",
            t: float | None = None) -> tuple[np.ndarray, float]:
    """Invert M, returning (M^{-1}, reciprocal condition estimate).

    The estimate is 1 / (||M||_1 ||M^{-1}||_1).  Raises SingularMatrixError
    when the estimate falls below SINGULAR_RCOND or the factorization
    breaks down outright.
    """
    M = as_matrix(M)
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError:
        raise SingularMatrixError(what, t, 0.0) from None
    if not np.all(np.isfinite(Minv)):
        raise SingularMatrixError(what, t, 0.0)
    rcond = rcond_estimate(M, Minv)
    if rcond < SINGULAR_RCOND:
        raise SingularMatrixError(what, t, rcond)
    return Minv, rcond


def rcond_estimate(M: np.ndarray, Minv: np.ndarray | None = None) -> float:
    """1-norm reciprocal condition estimate; 0.0 when M is not invertible."""
    M = as_matrix(M)
    if Minv is None:
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            return 0.0
        if not np.all(np.isfinite(Minv)):
            return 0.0
    n1 = float(np.abs(M).sum(axis=0).max())
    n2 = float(np.abs(Minv).sum(axis=0).max())
    if n1 == 0.0 or n2 == 0.0 or not math.isfinite(n1 * n2):
        return 0.0
    return 1.0 / (n1 * n2)


def determinant(M: np.ndarray) -> complex:
    """Determinant via pivoted LU (LAPACK); 0 for singular input."""
    return complex(np.linalg.det(as_matrix(M)))


def eig_hermitian(H: np.ndarray, tol: float = DEFAULT_TOL
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, V) with w real ascending and V unitary so that
    H = V diag(w) V*.  Sweeps run until the off-diagonal Frobenius mass
    drops below 1e-14 ||H||_F (at most 30 sweeps).  Raises
    NotHermitianError if the input's hermiticity defect exceeds ``tol``.
    """
    H = as_matrix(H)
    defect = hermiticity_defect(H)
    if defect > tol:
        raise NotHermitianError(defect, tol)
    n = H.shape[0]
    # Symmetrize exactly so roundoff asymmetry cannot leak into rotations.
    A = 0.5 * (H + np.conj(H.T))
    V = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([A[0, 0].real]), V

    scale = frobenius(A)
    if scale == 0.0:
        return np.zeros(n), V
    off_target = _JACOBI_OFF_REL * scale
    # Rotations smaller than this cannot move the off-diagonal mass
    # meaningfully; skipping them keeps sweeps finite.
    skip = off_target / (4.0 * n * n)

    for _ in range(_JACOBI_MAX_SWEEPS):
        if _offdiag_mass(A) <= off_target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = abs(A[p, q])
                if b <= skip:
                    continue
                phase = A[p, q] / b
                alpha = A[p, p].real
                gamma = A[q, q].real
                tau = (gamma - alpha) / (2.0 * b)
                if tau >= 0.0:
                    tt = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    tt = 1.0 / (tau - math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
                sp = s * phase
                spc = s * np.conj(phase)
                # A <- G* A G with G the (p,q) plane rotation.
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - spc * col_q
                A[:, q] = sp * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - sp * row_q
                A[q, :] = spc * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vcol_p = V[:, p].copy()
                vcol_q = V[:, q].copy()
                V[:, p] = c * vcol_p - spc * vcol_q
                V[:, q] = sp * vcol_p + c * vcol_q

    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _offdiag_mass(A: np.ndarray) -> float:
    d = A - np.diag(np.diag(A))
    return float(np.linalg.norm(d, "fro"))


@dataclass(frozen=True)
class DefinitenessReport:
    """Spectrum summary and sign classification of a (near-)Hermitian matrix."""

    min_eigenvalue: float
    max_eigenvalue: float
    hermiticity_defect: float
    classification: str
    tolerance_used: float

    @property
    def scale(self) -> float:
        return 1.0 + max(abs(self.min_eigenvalue), abs(self.max_eigenvalue))


def classify_definiteness(M: np.ndarray, tol: float = DEFAULT_TOL) -> DefinitenessReport:
    """Classify M as PD/PSD/ND/NSD/INDEFINITE, or NOT_HERMITIAN.

    The matrix is symmetrized before the eigensolve; thresholds are relative
    to the spectral scale 1 + max(|lambda_min|, |lambda_max|).  A matrix whose
    hermiticity defect exceeds ``tol`` is reported NOT_HERMITIAN (the spectrum
    of its Hermitian part is still filled in for diagnostics).
    """
    M = as_matrix(M)
    defect = hermiticity_defect(M)
    Hpart = 0.5 * (M + np.conj(M.T))
    w, _ = eig_hermitian(Hpart, tol=np.inf)
    lo = float(w[0])
    hi = float(w[-1])
    if defect > tol:
        cls = NOT_HERMITIAN
    else:
        scale = 1.0 + max(abs(lo), abs(hi))
        thr = tol * scale
        if lo > thr:
            cls = PD
        elif hi < -thr:
            cls = ND
        elif lo >= -thr:
            cls = PSD
        elif hi <= thr:
            cls = NSD
        else:
            cls = INDEFINITE
    return DefinitenessReport(min_eigenvalue=lo, max_eigenvalue=hi,
                              hermiticity_defect=defect, classification=cls,
                              tolerance_used=tol)
