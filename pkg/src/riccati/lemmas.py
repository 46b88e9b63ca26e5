"""Seeded randomized property suites for the trace and congruence facts the
certificate machinery leans on:

  * tr(M1 M2) = tr(M2 M1) for arbitrary complex matrices,
  * tr(H1 H2) >= 0 for Hermitian PSD H1, H2,
  * V H V* >= 0 for Hermitian PSD H and arbitrary V.

Each check reports its worst relative residual over the trials; the suites
are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrices import eig_hermitian, frobenius, hermitian_part

LEMMA_TOL = 1e-10
_DIMS = (1, 2, 3, 4, 5, 6)


def random_complex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_psd(rng: np.random.Generator, n: int) -> np.ndarray:
    A = random_complex(rng, n)
    return A @ np.conj(A.T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(random_complex(rng, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


@dataclass(frozen=True)
class LemmaResult:
    name: str
    trials: int
    worst_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst_residual <= self.tol


def check_trace_commutation(seed: int, trials: int,
                            tol: float = LEMMA_TOL) -> LemmaResult:
    """|tr(M1 M2) - tr(M2 M1)| relative to 1 + |tr(M1 M2)|."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.choice(_DIMS))
        M1 = random_complex(rng, n)
        M2 = random_complex(rng, n)
        t12 = complex(np.trace(M1 @ M2))
        t21 = complex(np.trace(M2 @ M1))
        worst = max(worst, abs(t12 - t21) / (1.0 + abs(t12)))
    return LemmaResult("trace_commutation", trials, worst, tol)


def check_psd_trace_product(seed: int, trials: int,
                            tol: float = LEMMA_TOL) -> LemmaResult:
    """tr(H1 H2) must be real and nonnegative for PSD Hermitian factors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.choice(_DIMS))
        H1 = random_psd(rng, n)
        H2 = random_psd(rng, n)
        tr = complex(np.trace(H1 @ H2))
        scale = 1.0 + frobenius(H1) * frobenius(H2)
        worst = max(worst, max(-tr.real, 0.0) / scale, abs(tr.imag) / scale)
    return LemmaResult("psd_trace_product", trials, worst, tol)


def check_congruence_psd(seed: int, trials: int,
                         tol: float = LEMMA_TOL) -> LemmaResult:
    """V H V* stays PSD: min eigenvalue of its Hermitian part, normalized."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.choice(_DIMS))
        H = random_psd(rng, n)
        V = random_complex(rng, n)
        C = hermitian_part(V @ H @ np.conj(V.T))
        w, _ = eig_hermitian(C, tol=np.inf)
        scale = 1.0 + frobenius(V) ** 2 * frobenius(H)
        worst = max(worst, max(-float(w[0]), 0.0) / scale)
    return LemmaResult("congruence_psd", trials, worst, tol)


def run_lemma_suites(seed: int, trials: int,
                     tol: float = LEMMA_TOL) -> list[LemmaResult]:
    """All three suites with per-suite derived seeds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return [
        check_trace_commutation(seed, trials, tol),
        check_psd_trace_product(seed + 1, trials, tol),
        check_congruence_psd(seed + 2, trials, tol),
    ]
