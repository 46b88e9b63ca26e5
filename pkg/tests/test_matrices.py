"""Matrix-core: arithmetic, eigensolver, definiteness classification.

Derived expectations come from independent oracles implemented here:
plain-loop trace of a product, cofactor-expansion determinants, and
quadratic-formula eigenvalues for 2x2 Hermitian matrices.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccati.errors import NotHermitianError, SingularMatrixError
from riccati.matrices import (INDEFINITE, ND, NOT_HERMITIAN, NSD, PD, PSD,
                              adjoint, classify_definiteness, determinant,
                              eig_hermitian, frobenius, hermitian_part,
                              hermiticity_defect, inverse, trace)


# ---------------------------------------------------------------- oracles

def trace_of_product_oracle(M1, M2):
    """tr(M1 M2) by explicit summation, no matrix multiply."""
    n = M1.shape[0]
    total = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            total += M1[j, k] * M2[k, j]
    return total


def det_cofactor_oracle(M):
    """Recursive cofactor expansion along the first row."""
    n = M.shape[0]
    if n == 1:
        return complex(M[0, 0])
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        total += (-1) ** j * M[0, j] * det_cofactor_oracle(minor)
    return total


def eig2_hermitian_oracle(H):
    """Roots of the characteristic polynomial of a 2x2 Hermitian matrix."""
    a = H[0, 0].real
    c = H[1, 1].real
    b = H[0, 1]
    disc = np.sqrt((a - c) ** 2 + 4.0 * abs(b) ** 2)
    return sorted([(a + c - disc) / 2.0, (a + c + disc) / 2.0])


def rand_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


# ----------------------------------------------------------- hermitian_part

def test_hermitian_part_direct():
    M = np.array([[0, 2], [0, 0]], dtype=complex)
    np.testing.assert_allclose(hermitian_part(M), [[0, 1], [1, 0]])


def test_hermitian_part_fixes_hermitian():
    H = np.array([[2, 1 - 1j], [1 + 1j, 5]], dtype=complex)
    np.testing.assert_allclose(hermitian_part(H), H)


def test_hermitian_part_pure_imaginary_scalar():
    np.testing.assert_allclose(hermitian_part(np.array([[1j]])), [[0]])


# ------------------------------------------------------------------- trace

def test_trace_identity():
    assert trace(np.eye(3)) == 3


def test_trace_nilpotent():
    assert trace(np.array([[0, 1], [0, 0]], dtype=complex)) == 0


def test_trace_cyclic_against_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        M1, M2 = rand_complex(rng, n), rand_complex(rng, n)
        t12 = trace(M1 @ M2)
        t21 = trace(M2 @ M1)
        oracle = trace_of_product_oracle(M1, M2)
        assert abs(t12 - oracle) <= 1e-12 * (1 + abs(oracle))
        assert abs(t12 - t21) <= 1e-12 * (1 + abs(t12))


# ----------------------------------------------------------------- adjoint

def test_adjoint_direct():
    M = np.array([[1j, 0], [2, 0]], dtype=complex)
    np.testing.assert_allclose(adjoint(M), [[-1j, 2], [0, 0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31 - 1))
def test_adjoint_involution(n, seed):
    M = rand_complex(np.random.default_rng(seed), n)
    np.testing.assert_allclose(adjoint(adjoint(M)), M)


def test_adjoint_fixes_hermitian():
    H = np.array([[1, 2 + 1j], [2 - 1j, -3]], dtype=complex)
    np.testing.assert_allclose(adjoint(H), H)


# ----------------------------------------------------------------- inverse

def test_inverse_identity():
    Minv, rcond = inverse(np.eye(3))
    np.testing.assert_allclose(Minv, np.eye(3))
    assert rcond == pytest.approx(1.0)


def test_inverse_diagonal():
    Minv, _ = inverse(np.diag([2.0, 4.0]).astype(complex))
    np.testing.assert_allclose(Minv, np.diag([0.5, 0.25]))


def test_inverse_shear():
    Minv, _ = inverse(np.array([[1, 1], [0, 1]], dtype=complex))
    np.testing.assert_allclose(Minv, [[1, -1], [0, 1]])


def test_inverse_residual_bound():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 7))
        M = rand_complex(rng, n) + 3 * np.eye(n)
        Minv, rcond = inverse(M)
        resid = frobenius(M @ Minv - np.eye(n))
        assert resid <= 1e-10 / max(rcond, 1e-16)


def test_inverse_singular_raises():
    with pytest.raises(SingularMatrixError):
        inverse(np.array([[1, 2], [2, 4]], dtype=complex))
    with pytest.raises(SingularMatrixError):
        inverse(np.zeros((2, 2)))


# ------------------------------------------------------------- determinant

def test_determinant_identity():
    assert determinant(np.eye(4)) == pytest.approx(1.0)


def test_determinant_scalar_shrinking():
    # diag(1 - t) at t = 0.5 in dimension 1
    assert determinant(np.array([[0.5]])) == pytest.approx(0.5)


def test_determinant_vs_cofactor_oracle():
    rng = np.random.default_rng(11)
    for _ in range(40):
        M = rand_complex(rng, 3)
        d = determinant(M)
        oracle = det_cofactor_oracle(M)
        assert abs(d - oracle) <= 1e-12 * (1 + abs(oracle))


# ----------------------------------------------------------- eig_hermitian

def test_eig_diagonal():
    w, _ = eig_hermitian(np.diag([2.0, 1.0]).astype(complex))
    np.testing.assert_allclose(w, [1.0, 2.0])


def test_eig_swap():
    w, _ = eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    np.testing.assert_allclose(w, [-1.0, 1.0])


def test_eig_2x2_against_characteristic_polynomial():
    rng = np.random.default_rng(13)
    for _ in range(100):
        A = rand_complex(rng, 2)
        H = A + np.conj(A.T)
        w, _ = eig_hermitian(H)
        expected = eig2_hermitian_oracle(H)
        np.testing.assert_allclose(w, expected, atol=1e-10 * (1 + frobenius(H)))


def test_eig_postconditions():
    rng = np.random.default_rng(17)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        A = rand_complex(rng, n)
        H = A + np.conj(A.T)
        w, V = eig_hermitian(H)
        assert np.all(np.diff(w) >= -1e-14)
        assert frobenius(V @ np.conj(V.T) - np.eye(n)) <= 1e-10
        recon = V @ np.diag(w.astype(complex)) @ np.conj(V.T)
        assert frobenius(recon - H) <= 1e-10 * (1 + frobenius(H))


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_invariant_under_unitary_conjugation():
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        A = rand_complex(rng, n)
        H = A + np.conj(A.T)
        Q, R = np.linalg.qr(rand_complex(rng, n))
        W = Q * (np.diag(R) / np.abs(np.diag(R)))
        w1, _ = eig_hermitian(H)
        w2, _ = eig_hermitian(W @ H @ np.conj(W.T))
        np.testing.assert_allclose(w1, w2, atol=1e-9 * (1 + frobenius(H)))


# ----------------------------------------------- classify_definiteness

def test_classify_identity_pd():
    assert classify_definiteness(np.eye(2)).classification == PD


def test_classify_zero_psd():
    rep = classify_definiteness(np.zeros((2, 2)))
    assert rep.classification == PSD
    assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-15)


def test_classify_indefinite():
    assert classify_definiteness(np.diag([1.0, -1.0])).classification == INDEFINITE


def test_classify_nd_nsd():
    assert classify_definiteness(-np.eye(2)).classification == ND
    assert classify_definiteness(np.diag([0.0, -1.0])).classification == NSD


def test_classify_not_hermitian_iff_defect():
    M = np.array([[0, 1], [0, 0]], dtype=complex)
    rep = classify_definiteness(M, tol=1e-9)
    assert rep.classification == NOT_HERMITIAN
    assert rep.hermiticity_defect > rep.tolerance_used
    # generous tolerance turns the same matrix into a classified one
    rep2 = classify_definiteness(M, tol=10.0)
    assert rep2.classification != NOT_HERMITIAN
    assert rep2.hermiticity_defect <= rep2.tolerance_used


def test_classification_invariant_under_unitary_congruence():
    rng = np.random.default_rng(23)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        A = rand_complex(rng, n)
        choice = rng.integers(0, 3)
        if choice == 0:
            H = A @ np.conj(A.T) + 0.1 * np.eye(n)  # PD
        elif choice == 1:
            H = -(A @ np.conj(A.T)) - 0.1 * np.eye(n)  # ND
        else:
            H = A + np.conj(A.T)  # usually indefinite
        Q, R = np.linalg.qr(rand_complex(rng, n))
        W = Q * (np.diag(R) / np.abs(np.diag(R)))
        c1 = classify_definiteness(H).classification
        c2 = classify_definiteness(W @ H @ np.conj(W.T)).classification
        assert c1 == c2


def test_hermiticity_defect_zero_for_hermitian():
    H = np.array([[1, 1j], [-1j, 2]], dtype=complex)
    assert hermiticity_defect(H) == 0.0
