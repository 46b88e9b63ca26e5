"""Matrix-valued functions of time built from a fixed scalar basis.

Each entry of a MatrixTimeFn is a finite sum of terms c * phi(t) with phi
drawn from {1, t^k, sin(w t), cos(w t), exp(a t)}.  The basis is closed
under d/dt, so derivatives are exact, and piecewise definitions switch at
explicit breakpoints with right-continuous evaluation (matching forward
integration).
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

CONST = "const"
POLY = "poly"
SIN = "sin"
COS = "cos"
EXP = "exp"

_KINDS = (CONST, POLY, SIN, COS, EXP)


@dataclass(frozen=True)
class BasisTerm:
    """One scalar term c * phi(t).

    ``param`` is the polynomial degree k for POLY, the angular frequency for
    SIN/COS, and the exponent rate for EXP; it is ignored for CONST.
    """

    kind: str
    coeff: complex
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        c = complex(self.coeff)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("non-finite coefficient")
        p = float(self.param)
        if not math.isfinite(p):
            raise ValueError("non-finite basis parameter")
        if self.kind == POLY and (p < 0 or p != int(p)):
            raise ValueError(f"polynomial degree must be a nonnegative integer, got {p}")
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "param", p)

    def derivative_terms(self) -> list["BasisTerm"]:
        """Exact d/dt of this term, expressed in the same basis."""
        c, p = self.coeff, self.param
        if self.kind == CONST:
            return []
        if self.kind == POLY:
            if p == 0:
                return []
            if p == 1:
                return [BasisTerm(CONST, c)]
            return [BasisTerm(POLY, c * p, p - 1)]
        if self.kind == SIN:
            return [BasisTerm(COS, c * p, p)]
        if self.kind == COS:
            return [BasisTerm(SIN, -c * p, p)]
        return [BasisTerm(EXP, c * p, p)]  # EXP


def const(c) -> BasisTerm:
    return BasisTerm(CONST, c)


def poly(c, k: int) -> BasisTerm:
    return BasisTerm(POLY, c, k)


def sin(c, omega: float) -> BasisTerm:
    return BasisTerm(SIN, c, omega)


def cos(c, omega: float) -> BasisTerm:
    return BasisTerm(COS, c, omega)


def exp(c, a: float) -> BasisTerm:
    return BasisTerm(EXP, c, a)


def _basis_value(kind: str, param: float, t: float) -> float:
    if kind == CONST:
        return 1.0
    if kind == POLY:
        return t ** int(param)
    if kind == SIN:
        return math.sin(param * t)
    if kind == COS:
        return math.cos(param * t)
    return math.exp(param * t)


def _basis_values(kind: str, param: float, ts: np.ndarray) -> np.ndarray:
    if kind == CONST:
        return np.ones_like(ts)
    if kind == POLY:
        return ts ** int(param)
    if kind == SIN:
        return np.sin(param * ts)
    if kind == COS:
        return np.cos(param * ts)
    return np.exp(param * ts)


class _Piece:
    """Terms of one piecewise segment, grouped by basis function.

    ``bases`` lists distinct (kind, param) pairs and ``coeffs[i]`` is the
    n x n complex coefficient matrix multiplying basis i.
    """

    __slots__ = ("bases", "coeffs")

    def __init__(self, bases: list[tuple[str, float]], coeffs: np.ndarray):
        self.bases = bases
        self.coeffs = coeffs

    @classmethod
    def from_entries(cls, n: int, entries) -> "_Piece":
        grouped: dict[tuple[str, float], np.ndarray] = {}
        for i in range(n):
            for j in range(n):
                for term in entries[i][j]:
                    key = (term.kind, term.param if term.kind != CONST else 0.0)
                    if key not in grouped:
                        grouped[key] = np.zeros((n, n), dtype=np.complex128)
                    grouped[key][i, j] += term.coeff
        # Drop all-zero groups so eval cost tracks live terms only.
        bases, coeffs = [], []
        for key in sorted(grouped, key=lambda k: (_KINDS.index(k[0]), k[1])):
            if np.any(grouped[key] != 0):
                bases.append(key)
                coeffs.append(grouped[key])
        if not bases:
            return cls([(CONST, 0.0)], np.zeros((1, n, n), dtype=np.complex128))
        return cls(bases, np.stack(coeffs))

    def value(self, t: float) -> np.ndarray:
        out = np.zeros(self.coeffs.shape[1:], dtype=np.complex128)
        for k, (kind, param) in enumerate(self.bases):
            out += _basis_value(kind, param, t) * self.coeffs[k]
        return out

    def values(self, ts: np.ndarray) -> np.ndarray:
        phis = np.stack([_basis_values(kind, param, ts) for kind, param in self.bases])
        return np.einsum("km,kij->mij", phis, self.coeffs)

    def entry_terms(self, n: int) -> list[list[list[BasisTerm]]]:
        entries: list[list[list[BasisTerm]]] = [[[] for _ in range(n)] for _ in range(n)]
        for k, (kind, param) in enumerate(self.bases):
            C = self.coeffs[k]
            for i in range(n):
                for j in range(n):
                    if C[i, j] != 0:
                        entries[i][j].append(BasisTerm(kind, complex(C[i, j]), param))
        return entries

    def derivative(self, n: int) -> "_Piece":
        entries = [[sum((t.derivative_terms() for t in cell), [])
                    for cell in row] for row in self.entry_terms(n)]
        return _Piece.from_entries(n, entries)

    def map_coeffs(self, fn) -> "_Piece":
        return _Piece(list(self.bases), fn(self.coeffs))


class MatrixTimeFn:
    """Piecewise matrix function of t with exact derivatives.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, n: int, pieces: list[_Piece],
                 breakpoints: tuple[float, ...] = ()):
        if n < 1:
            raise ValueError("dimension must be positive")
        if len(pieces) != len(breakpoints) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
            raise ValueError("breakpoints must be strictly ascending")
        self.n = n
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self._pieces = pieces
        self._derivative: MatrixTimeFn | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_entries(cls, n: int, entries, breakpoints=()) -> "MatrixTimeFn":
        """Single-piece function from an n x n nested list of term lists."""
        if breakpoints:
            raise ValueError("use from_pieces for piecewise definitions")
        return cls(n, [_Piece.from_entries(n, entries)])

    @classmethod
    def from_pieces(cls, n: int, piece_entries, breakpoints) -> "MatrixTimeFn":
        pieces = [_Piece.from_entries(n, e) for e in piece_entries]
        return cls(n, pieces, tuple(breakpoints))

    @classmethod
    def constant(cls, M) -> "MatrixTimeFn":
        M = np.asarray(M, dtype=np.complex128)
        if M.ndim == 0:
            M = M.reshape(1, 1)
        n = M.shape[0]
        if M.shape != (n, n):
            raise ValueError("constant value must be square")
        entries = [[[BasisTerm(CONST, M[i, j])] if M[i, j] != 0 else []
                    for j in range(n)] for i in range(n)]
        return cls.from_entries(n, entries)

    @classmethod
    def zero(cls, n: int) -> "MatrixTimeFn":
        return cls.constant(np.zeros((n, n)))

    @classmethod
    def identity(cls, n: int, scale: complex = 1.0) -> "MatrixTimeFn":
        return cls.constant(scale * np.eye(n))

    @classmethod
    def scalar(cls, *terms: BasisTerm) -> "MatrixTimeFn":
        return cls.from_entries(1, [[list(terms)]])

    @classmethod
    def diagonal(cls, cells: list[list[BasisTerm]]) -> "MatrixTimeFn":
        n = len(cells)
        entries = [[list(cells[i]) if i == j else [] for j in range(n)]
                   for i in range(n)]
        return cls.from_entries(n, entries)

    # -- evaluation --------------------------------------------------------

    def _piece_at(self, t: float) -> _Piece:
        if not self.breakpoints:
            return self._pieces[0]
        return self._pieces[bisect_right(self.breakpoints, t)]

    def eval(self, t: float) -> np.ndarray:
        """Value at t; right limit at breakpoints."""
        return self._piece_at(float(t)).value(float(t))

    def eval_left(self, t: float) -> np.ndarray:
        """Value at t taking the left limit at breakpoints.

        Used by the integrator for stages landing exactly on a seam, where
        the step belongs to the piece left of it.
        """
        t = float(t)
        if not self.breakpoints:
            return self._pieces[0].value(t)
        return self._pieces[bisect_left(self.breakpoints, t)].value(t)

    def eval_many(self, ts) -> np.ndarray:
        """Values on an ascending array of times, shape (len(ts), n, n)."""
        ts = np.asarray(ts, dtype=float)
        if not self.breakpoints:
            return self._pieces[0].values(ts)
        idx = np.searchsorted(np.asarray(self.breakpoints), ts, side="right")
        out = np.empty((ts.size, self.n, self.n), dtype=np.complex128)
        for k in range(len(self._pieces)):
            mask = idx == k
            if np.any(mask):
                out[mask] = self._pieces[k].values(ts[mask])
        return out

    def deriv(self, t: float) -> np.ndarray:
        """Exact analytic derivative; right-sided at breakpoints."""
        return self.derivative().eval(t)

    def derivative(self) -> "MatrixTimeFn":
        """The derivative as a MatrixTimeFn (the basis is closed under d/dt)."""
        if self._derivative is None:
            self._derivative = MatrixTimeFn(
                self.n, [p.derivative(self.n) for p in self._pieces],
                self.breakpoints)
        return self._derivative

    def is_breakpoint(self, t: float, tol: float = 0.0) -> bool:
        return any(abs(t - b) <= tol for b in self.breakpoints)

    # -- algebra -----------------------------------------------------------

    def adjoint(self) -> "MatrixTimeFn":
        """Pointwise conjugate transpose (basis functions are real-valued)."""
        return MatrixTimeFn(
            self.n,
            [p.map_coeffs(lambda C: np.conj(np.swapaxes(C, 1, 2))) for p in self._pieces],
            self.breakpoints)

    def scaled(self, alpha: complex) -> "MatrixTimeFn":
        alpha = complex(alpha)
        return MatrixTimeFn(
            self.n, [p.map_coeffs(lambda C: alpha * C) for p in self._pieces],
            self.breakpoints)

    def __add__(self, other: "MatrixTimeFn") -> "MatrixTimeFn":
        if not isinstance(other, MatrixTimeFn):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        pieces = []
        probes = [min(bps[0] - 1.0, -1.0)] + list(bps) if bps else [0.0]
        for tp in probes:
            a = self._piece_at(tp).entry_terms(self.n)
            b = other._piece_at(tp).entry_terms(self.n)
            merged = [[a[i][j] + b[i][j] for j in range(self.n)]
                      for i in range(self.n)]
            pieces.append(_Piece.from_entries(self.n, merged))
        return MatrixTimeFn(self.n, pieces, tuple(bps))

    # -- queries -----------------------------------------------------------

    def entry_terms_at(self, t: float) -> list[list[list[BasisTerm]]]:
        """Canonical per-entry term lists of the piece active at t."""
        return self._piece_at(t).entry_terms(self.n)

    def pieces_entry_terms(self) -> list[list[list[list[BasisTerm]]]]:
        return [p.entry_terms(self.n) for p in self._pieces]

    def has_real_coefficients(self) -> bool:
        """True iff every term coefficient is real (so values are real)."""
        return all(float(np.max(np.abs(p.coeffs.imag))) == 0.0
                   for p in self._pieces)

    def __repr__(self):
        return (f"MatrixTimeFn(n={self.n}, pieces={len(self._pieces)}, "
                f"breakpoints={self.breakpoints})")


def is_hermitian_valued(f: MatrixTimeFn, grid, tol: float) -> tuple[bool, float]:
    """Check Hermitian-valuedness on a grid; returns (ok, worst defect)."""
    vals = f.eval_many(np.asarray(grid, dtype=float))
    defects = (np.linalg.norm(vals - np.conj(np.swapaxes(vals, 1, 2)), axis=(1, 2))
               / (1.0 + np.linalg.norm(vals, axis=(1, 2))))
    worst = float(defects.max()) if defects.size else 0.0
    return worst <= tol, worst
