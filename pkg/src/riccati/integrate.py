"""Adaptive time integration for the quadratic matrix ODE and its linear
companion system, with finite-escape-time (blowup) detection.

The stepper is an explicit embedded Dormand-Prince 5(4) pair on matrix
states, with cubic Hermite dense output per accepted step.  Breakpoints of
the coefficient functions are mandatory step endpoints so the formal order
survives piecewise seams.

Blowup is declared only when the solution norm exceeds the blowup
threshold AND the accepted step size collapses; either symptom alone is
ambiguous (large-but-finite solutions, plain stiffness).
"""

from __future__ import annotations

import cmath
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import RiccatiError, StepOverflowError
from .matrices import eig_hermitian, frobenius, rcond_estimate
from .problem import RiccatiProblem
from .timefn import MatrixTimeFn

COMPLETED = "COMPLETED"
BLOWUP = "BLOWUP"
PHI_SINGULAR = "PHI_SINGULAR"
STEP_UNDERFLOW = "STEP_UNDERFLOW"

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b5 - b4: weights of the embedded error estimate.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_GROW_MAX = 5.0
_SHRINK_MIN = 0.1
_ORDER_EXP = 0.2  # 1 / (order + 1)

# Step-collapse scale entering the blowup conjunction.
BLOWUP_STEP_SCALE = 1e-10

# Effective-rcond floor below which a Radon continuation is singular.
PHI_RCOND_FLOOR = 1e-10


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-9
    atol: float = 1e-9
    h_min: float = 1e-13
    h_max: float = 0.25
    h_init: float | None = None
    blowup_threshold: float = 1e8
    sample_dt: float = 0.1
    max_steps: int = 2_000_000


@dataclass(frozen=True)
class _Segment:
    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    f0: np.ndarray
    f1: np.ndarray

    def eval(self, t: float) -> np.ndarray:
        h = self.t1 - self.t0
        th = (t - self.t0) / h
        t2 = th * th
        t3 = t2 * th
        return ((2 * t3 - 3 * t2 + 1) * self.y0
                + (t3 - 2 * t2 + th) * h * self.f0
                + (-2 * t3 + 3 * t2) * self.y1
                + (t3 - t2) * h * self.f1)


class DenseOutput:
    """Piecewise cubic Hermite interpolant over the accepted steps.

    A run that terminates before its first accepted step degenerates to a
    single point; ``origin`` supplies it.
    """

    def __init__(self, segments: list[_Segment],
                 origin: tuple[float, np.ndarray] | None = None):
        if not segments and origin is None:
            raise ValueError("empty dense output needs an origin point")
        self._segments = segments
        self._starts = [s.t0 for s in segments]
        if segments:
            self.t0 = segments[0].t0
            self.t1 = segments[-1].t1
            self._y_origin = None
        else:
            self.t0 = self.t1 = origin[0]
            self._y_origin = origin[1]

    def segment_at(self, t: float) -> _Segment:
        i = bisect_right(self._starts, t) - 1
        i = min(max(i, 0), len(self._segments) - 1)
        return self._segments[i]

    def eval(self, t: float) -> np.ndarray:
        pad = 1e-9 * (1.0 + abs(self.t1))
        if t < self.t0 - pad or t > self.t1 + pad:
            raise ValueError(f"t={t} outside covered range [{self.t0}, {self.t1}]")
        if not self._segments:
            return self._y_origin
        return self.segment_at(min(max(t, self.t0), self.t1)).eval(t)

    def step_size_at(self, t: float) -> float:
        if not self._segments:
            return 0.0
        s = self.segment_at(t)
        return s.t1 - s.t0

    @property
    def segments(self) -> list[_Segment]:
        return self._segments


def _rk_stages(f, t: float, y: np.ndarray, h: float,
               k1: np.ndarray | None = None):
    """One Dormand-Prince step.  Returns (y5, err_matrix, k_last).

    ``k_last`` is the FSAL stage, the derivative at (t + h, y5).  Non-finite
    stage arithmetic is tolerated; the caller inspects the outputs.
    """
    k = [None] * 7
    with np.errstate(all="ignore"):
        k[0] = f(t, y) if k1 is None else k1
        for i in range(1, 7):
            yi = y
            for j, a in enumerate(_A[i]):
                if a != 0.0:
                    yi = yi + (h * a) * k[j]
            k[i] = f(t + _C[i] * h, yi)
        y5 = y
        for i, b in enumerate(_B5):
            if b != 0.0:
                y5 = y5 + (h * b) * k[i]
        err = np.zeros_like(y)
        for i, e in enumerate(_E):
            if e != 0.0:
                err = err + (h * e) * k[i]
    return y5, err, k[6]


def step_rk(prob: RiccatiProblem, t: float, Z: np.ndarray, h: float
            ) -> tuple[np.ndarray, float]:
    """Single embedded 4/5 step on Z' = rhs(t, Z); returns (Z_next, ||Z5 - Z4||_F)."""
    if h <= 0:
        raise ValueError("step size must be positive")
    Z = np.asarray(Z, dtype=np.complex128)
    if not np.all(np.isfinite(Z)):
        raise StepOverflowError("OVERFLOW: non-finite state entering step")
    y5, err, _ = _rk_stages(prob.rhs, t, Z, h)
    if not np.all(np.isfinite(y5)):
        raise StepOverflowError(f"OVERFLOW: non-finite entries after step at t={t}")
    return y5, frobenius(err)


@dataclass
class _CoreResult:
    status: str
    t_last: float
    y_last: np.ndarray
    dense: DenseOutput
    n_accepted: int
    n_rejected: int


def _initial_step(f, t0, y0, f0, opts: IntegratorOptions, span: float) -> float:
    scale = opts.atol + opts.rtol * frobenius(y0)
    d = frobenius(f0)
    h = 0.01 * scale ** _ORDER_EXP if d == 0 else 0.01 * (scale / d) ** _ORDER_EXP
    return min(opts.h_max, max(opts.h_min * 10, h, 1e-6), span)


def _integrate_core(f, t0: float, t_end: float, y0: np.ndarray,
                    opts: IntegratorOptions,
                    breakpoints: list[float],
                    f_left=None) -> _CoreResult:
    """Adaptive RK45 from t0 to t_end with forced endpoints at breakpoints.

    ``f_left`` evaluates the vector field with left-limit coefficients; it
    is used for stages landing exactly on a forced endpoint, which belong
    to the piece left of the seam.
    """
    if f_left is None:
        f_left = f
    stops = sorted(b for b in breakpoints if t0 < b < t_end) + [t_end]
    t = t0
    y = np.asarray(y0, dtype=np.complex128)
    if not np.all(np.isfinite(y)):
        raise StepOverflowError("OVERFLOW: non-finite initial state")
    fcur = f(t, y)
    h = opts.h_init or _initial_step(f, t0, y, fcur, opts, t_end - t0)
    segments: list[_Segment] = []
    n_acc = n_rej = 0
    stop_i = 0

    def result(status):
        return _CoreResult(status, t, y, DenseOutput(segments, origin=(t, y)),
                           n_acc, n_rej)

    for _ in range(opts.max_steps):
        if t >= t_end:
            break
        seg_end = stops[stop_i]
        if t >= seg_end - 1e-14 * (1.0 + abs(seg_end)):
            stop_i += 1
            # Coefficient definitions may switch here; re-evaluate the slope
            # on the right side of the seam.
            fcur = f(t, y)
            continue

        norm_y = frobenius(y)
        collapsed = h < BLOWUP_STEP_SCALE * (1.0 + abs(t))
        if collapsed and norm_y >= opts.blowup_threshold:
            return result(BLOWUP)
        if h < opts.h_min:
            return result(BLOWUP if norm_y >= opts.blowup_threshold
                          else STEP_UNDERFLOW)

        h_try = min(h, seg_end - t)

        def f_stage(tt, yy, _b=seg_end):
            return f_left(_b, yy) if tt >= _b else f(tt, yy)

        y_new, err_mat, f_new = _rk_stages(f_stage, t, y, h_try, k1=fcur)
        finite = bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_mat)))
        err = frobenius(err_mat) if finite else math.inf
        scale = opts.atol + opts.rtol * max(norm_y,
                                            frobenius(y_new) if finite else 0.0)
        if err <= scale:
            t_new = seg_end if seg_end - (t + h_try) <= 1e-14 * (1.0 + abs(seg_end)) \
                else t + h_try
            segments.append(_Segment(t, t_new, y, y_new, fcur, f_new))
            t, y, fcur = t_new, y_new, f_new
            n_acc += 1
            factor = _GROW_MAX if err == 0.0 else min(
                _GROW_MAX, _SAFETY * (scale / err) ** _ORDER_EXP)
            h = min(opts.h_max, h * max(factor, 0.2))
        else:
            n_rej += 1
            factor = _SHRINK_MIN if not finite else max(
                _SHRINK_MIN, _SAFETY * (scale / err) ** _ORDER_EXP)
            h = h * min(factor, 0.9)
    else:
        raise RiccatiError(f"step budget exceeded ({opts.max_steps} steps) at t={t}")

    return result(COMPLETED)


@dataclass(frozen=True)
class SampleDiagnostics:
    t: float
    fro_norm: float
    min_eig_herm: float
    step_size: float


@dataclass
class Trajectory:
    """Sampled solution of a matrix ODE with termination status.

    ``t_end`` is the last accepted time; for BLOWUP it is the reported
    escape time.  ``dense`` evaluates the solution anywhere in
    [times[0], t_end].
    """

    n: int
    times: np.ndarray
    Z_samples: list[np.ndarray]
    status: str
    t_end: float
    diagnostics: list[SampleDiagnostics]
    dense: DenseOutput
    n_accepted: int = 0
    n_rejected: int = 0

    def eval(self, t: float) -> np.ndarray:
        return self.dense.eval(t)

    @property
    def t_escape(self) -> float | None:
        return self.t_end if self.status == BLOWUP else None

    @property
    def final(self) -> np.ndarray:
        return self.Z_samples[-1]


def _sample_times(t0: float, t_last: float, dt: float) -> np.ndarray:
    if t_last <= t0:
        return np.array([t0])
    count = int(math.floor((t_last - t0) / dt + 1e-9))
    ts = [t0 + k * dt for k in range(count + 1)]
    if t_last - ts[-1] > 1e-9 * max(1.0, abs(t_last)):
        ts.append(t_last)
    else:
        ts[-1] = t_last
    return np.array(ts)


def _min_eig_doubled(Z: np.ndarray) -> float:
    w, _ = eig_hermitian(Z + np.conj(Z.T), tol=np.inf)
    return float(w[0])


def integrate_riccati(prob: RiccatiProblem, Z0: np.ndarray,
                      opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate the quadratic matrix ODE from t0 toward the horizon.

    Terminates early with status BLOWUP when the solution norm passes the
    blowup threshold while the step size collapses, or STEP_UNDERFLOW when
    the step drops below h_min without that norm growth.
    """
    opts = opts or IntegratorOptions()
    Z0 = np.asarray(Z0, dtype=np.complex128)
    if Z0.shape != (prob.n, prob.n):
        raise ValueError(f"Z0 shape {Z0.shape} does not match n={prob.n}")
    core = _integrate_core(prob.rhs, prob.t0, prob.horizon, Z0, opts,
                           prob.breakpoints(), f_left=prob.rhs_left)
    return _trajectory_from_core(prob.n, core, opts)


def _trajectory_from_core(n: int, core: _CoreResult,
                          opts: IntegratorOptions) -> Trajectory:
    ts = _sample_times(core.dense.t0, core.t_last, opts.sample_dt)
    samples = [core.dense.eval(t) for t in ts]
    diags = [SampleDiagnostics(t=float(t), fro_norm=frobenius(Z),
                               min_eig_herm=_min_eig_doubled(Z),
                               step_size=core.dense.step_size_at(t))
             for t, Z in zip(ts, samples)]
    return Trajectory(n=n, times=ts, Z_samples=samples, status=core.status,
                      t_end=core.t_last, diagnostics=diags, dense=core.dense,
                      n_accepted=core.n_accepted, n_rejected=core.n_rejected)


@dataclass
class LinearFlow:
    """Solution of the companion linear system with Phi(t0) = I, Psi(t0) = Z0."""

    n: int
    times: np.ndarray
    Phi_samples: list[np.ndarray]
    Psi_samples: list[np.ndarray]
    detPhi: np.ndarray
    status: str
    t_end: float
    dense: DenseOutput

    def phi_psi(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        Y = self.dense.eval(t)
        return Y[: self.n], Y[self.n:]

    def phi_history_scale(self, t: float) -> float:
        """Largest sampled ||Phi||_F up to time t (at least the initial one)."""
        i = int(np.searchsorted(self.times, t, side="right"))
        norms = [frobenius(P) for P in self.Phi_samples[: max(i, 1)]]
        return max(norms)


def integrate_linear_system(prob: RiccatiProblem, Z0: np.ndarray,
                            opts: IntegratorOptions | None = None) -> LinearFlow:
    """Integrate Phi' = R Phi + P Psi, Psi' = -S Phi - Q Psi as one 2n x n block."""
    opts = opts or IntegratorOptions()
    n = prob.n
    Z0 = np.asarray(Z0, dtype=np.complex128)
    if Z0.shape != (n, n):
        raise ValueError(f"Z0 shape {Z0.shape} does not match n={n}")
    Y0 = np.vstack([np.eye(n, dtype=np.complex128), Z0])

    def make_f(left: bool):
        def f(t: float, Y: np.ndarray) -> np.ndarray:
            if left:
                P, Q = prob.P.eval_left(t), prob.Q.eval_left(t)
                R, S = prob.R.eval_left(t), prob.S.eval_left(t)
            else:
                P, Q = prob.P.eval(t), prob.Q.eval(t)
                R, S = prob.R.eval(t), prob.S.eval(t)
            Phi = Y[:n]
            Psi = Y[n:]
            return np.vstack([R @ Phi + P @ Psi, -S @ Phi - Q @ Psi])
        return f

    core = _integrate_core(make_f(False), prob.t0, prob.horizon, Y0, opts,
                           prob.breakpoints(), f_left=make_f(True))
    ts = _sample_times(prob.t0, core.t_last, opts.sample_dt)
    Phis, Psis, dets = [], [], []
    for t in ts:
        Y = core.dense.eval(t)
        Phis.append(Y[:n])
        Psis.append(Y[n:])
        dets.append(complex(np.linalg.det(Y[:n])))
    return LinearFlow(n=n, times=ts, Phi_samples=Phis, Psi_samples=Psis,
                      detPhi=np.array(dets), status=core.status,
                      t_end=core.t_last, dense=core.dense)


def integrate_lyapunov(A: MatrixTimeFn, S: MatrixTimeFn, Z0: np.ndarray,
                       t0: float, horizon: float,
                       opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate the linear comparison equation Z' + A* Z + Z A + S = 0."""
    opts = opts or IntegratorOptions()
    n = A.n
    Z0 = np.asarray(Z0, dtype=np.complex128)
    if Z0.shape != (n, n):
        raise ValueError(f"Z0 shape {Z0.shape} does not match n={n}")
    Astar = A.adjoint()

    def f(t: float, Z: np.ndarray) -> np.ndarray:
        return -(Astar.eval(t) @ Z + Z @ A.eval(t) + S.eval(t))

    def f_left(t: float, Z: np.ndarray) -> np.ndarray:
        return -(Astar.eval_left(t) @ Z + Z @ A.eval_left(t) + S.eval_left(t))

    bps = sorted(set(A.breakpoints) | set(S.breakpoints))
    core = _integrate_core(f, t0, horizon, Z0, opts,
                           [b for b in bps if t0 < b < horizon],
                           f_left=f_left)
    return _trajectory_from_core(n, core, opts)


@dataclass(frozen=True)
class RadonValue:
    """Pointwise Radon continuation Psi(t) Phi(t)^{-1}, or a singularity finding."""

    t: float
    singular: bool
    rcond: float
    value: np.ndarray | None = None


def radon_continue(flow: LinearFlow, t: float) -> RadonValue:
    """Psi(t) Phi(t)^{-1} when Phi(t) is effectively invertible.

    The effective reciprocal condition combines the 1-norm estimate with the
    size of Phi(t) relative to the flow's own history: a Phi that has shrunk
    to nothing is singular for continuation purposes even though, entrywise,
    it may still invert (the scalar case has rcond 1 all the way into the
    escape time).
    """
    Phi, Psi = flow.phi_psi(t)
    rc = rcond_estimate(Phi)
    hist = flow.phi_history_scale(t)
    rc_eff = min(rc, frobenius(Phi) / (1.0 + hist))
    if rc_eff < PHI_RCOND_FLOOR:
        return RadonValue(t=t, singular=True, rcond=rc_eff)
    Z = Psi @ np.linalg.inv(Phi)
    if not np.all(np.isfinite(Z)):
        return RadonValue(t=t, singular=True, rcond=rc_eff)
    return RadonValue(t=t, singular=False, rcond=rc_eff, value=Z)


def _logabsdet_phi(flow: LinearFlow, t: float) -> float:
    Phi, _ = flow.phi_psi(t)
    sign, logdet = np.linalg.slogdet(Phi)
    if sign == 0:
        return -math.inf
    return float(logdet)


def first_phi_singularity(flow: LinearFlow, num: int = 2001) -> float | None:
    """Earliest root of det Phi(t) on the covered range, or None.

    Scans log|det Phi| on a uniform grid, then refines each candidate local
    minimum by golden-section search.  A candidate counts as a root only if
    refinement drives |det| far below its neighborhood values.
    """
    a, b = flow.dense.t0, flow.dense.t1
    ts = np.linspace(a, b, num)
    vals = np.array([_logabsdet_phi(flow, t) for t in ts])
    for i in range(1, num - 1):
        if not (vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]):
            continue
        lo, hi = ts[i - 1], ts[i + 1]
        t_star = _golden_min(lambda t: _logabsdet_phi(flow, t), lo, hi)
        v_star = _logabsdet_phi(flow, t_star)
        neighborhood = min(vals[i - 1], vals[i + 1])
        if v_star < neighborhood + math.log(1e-6):
            return float(t_star)
    return None


def _golden_min(f, a: float, b: float, iters: int = 80) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if b - a < 1e-14 * (1.0 + abs(a)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def adaptive_simpson(g, a: float, b: float, tol: float = 1e-9,
                     breakpoints: tuple[float, ...] = ()) -> complex:
    """Adaptive Simpson quadrature of a complex-valued integrand."""
    if b < a:
        return -adaptive_simpson(g, b, a, tol, breakpoints)
    pts = [a] + sorted(p for p in set(breakpoints) if a < p < b) + [b]
    total = 0.0 + 0.0j
    for lo, hi in zip(pts, pts[1:]):
        total += _simpson_rec(g, lo, hi, tol, depth=50)
    return total


def _simpson_segment(g, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = g(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _simpson_rec(g, a: float, b: float, tol: float, depth: int) -> complex:
    fa, fb = g(a), g(b)
    m, fm, whole = _simpson_segment(g, a, fa, b, fb)
    return _simpson_step(g, a, fa, m, fm, b, fb, whole, tol, depth)


def _simpson_step(g, a, fa, m, fm, b, fb, whole, tol, depth) -> complex:
    lm, flm, left = _simpson_segment(g, a, fa, m, fm)
    rm, frm, right = _simpson_segment(g, m, fm, b, fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = tol / 2.0
    return (_simpson_step(g, a, fa, lm, flm, m, fm, left, half, depth - 1)
            + _simpson_step(g, m, fm, rm, frm, b, fb, right, half, depth - 1))


def liouville_residual(prob: RiccatiProblem, flow: LinearFlow,
                       traj: Trajectory, t: float,
                       quad_tol: float = 1e-9) -> float:
    """Relative mismatch between det Phi(t) and the trace-integral evolution
    det Phi(t0) exp(int tr[R + P Z]).

    Compared in log space so large determinants cannot overflow; the
    quadrature runs on the trajectory's dense output.
    """
    t0 = flow.dense.t0
    Phi0, _ = flow.phi_psi(t0)
    Phi_t, _ = flow.phi_psi(t)

    def logdet(M: np.ndarray) -> complex:
        sign, la = np.linalg.slogdet(M)
        if sign == 0:
            return complex(-math.inf, 0.0)
        return complex(la, cmath.phase(complex(sign)))

    def integrand(tau: float) -> complex:
        Z = traj.dense.eval(tau)
        return complex(np.trace(prob.R.eval(tau) + prob.P.eval(tau) @ Z))

    integral = adaptive_simpson(integrand, t0, t, tol=quad_tol,
                                breakpoints=tuple(prob.breakpoints()))
    w = logdet(Phi_t) - (logdet(Phi0) + integral)
    # |e^w - 1| equals |lhs - rhs| / |rhs|; the 2*pi*i ambiguity of the
    # complex log cancels under exponentiation.
    if abs(w) < 1e-6:
        return abs(w)
    return abs(cmath.exp(w) - 1.0)
