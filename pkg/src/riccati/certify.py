"""Numerical verification of the global-existence certificate (U, Lambda, mu)
and of the comparison sandwich for the linear majorant.

A certificate is accepted when, on a finite check grid,

  I.   P(t) U(t) is Hermitian and positive semidefinite,
  II.  R(t) - (U^{-1} Q U)* - P U (Lam* - Lam) - (U^{-1} U')* is a real
       scalar multiple of the identity (the multiplier mu, supplied or
       extracted),
  III. the transformed source S_t satisfies S_t + S_t* <= 0,

and the initial value lies in the certified cone: the gap matrix
U^{-1}(t0) Z0 + Z0* U^{-*}(t0) - Lam(t0) - Lam*(t0) is PD (strict branch)
or PSD with U^{-1}(t0) + U^{-*}(t0) PD (nonstrict branch).

All verdicts are grid-and-tolerance statements, never analytic proofs; the
report records the grid and tolerances used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, SingularMatrixError
from .matrices import (DEFAULT_TOL, PD, PSD, classify_definiteness,
                       eig_hermitian, frobenius)
from .integrate import (COMPLETED, IntegratorOptions, Trajectory,
                        integrate_lyapunov, integrate_riccati)
from .problem import CERT_RCOND_FLOOR, Certificate, RiccatiProblem

STRICT = "STRICT"
NONSTRICT = "NONSTRICT"
FAIL = "FAIL"

CERTIFIED_STRICT = "CERTIFIED_STRICT"
CERTIFIED_NONSTRICT = "CERTIFIED_NONSTRICT"
NOT_CERTIFIED = "NOT_CERTIFIED"

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"

# Default tolerance for trajectory-invariant monitoring; integration error
# accumulates above the raw certificate tolerance.
MONITOR_TOL = 1e-7


def _batch_adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def _batch_inv_u(cert: Certificate, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """U(t) and U(t)^{-1} on the grid; raises SingularMatrixError("U")."""
    Uv = cert.U.eval_many(ts)
    try:
        Uinv = np.linalg.inv(Uv)
    except np.linalg.LinAlgError:
        t_bad = _first_bad_rcond(Uv, ts)
        raise SingularMatrixError("U", t_bad, 0.0) from None
    n1 = np.abs(Uv).sum(axis=-2).max(axis=-1)
    n2 = np.abs(Uinv).sum(axis=-2).max(axis=-1)
    with np.errstate(all="ignore"):
        rc = 1.0 / (n1 * n2)
    rc = np.where(np.isfinite(rc), rc, 0.0)
    if rc.min() < CERT_RCOND_FLOOR:
        i = int(rc.argmin())
        raise SingularMatrixError("U", float(ts[i]), float(rc[i]))
    return Uv, Uinv


def _first_bad_rcond(Mv: np.ndarray, ts: np.ndarray) -> float:
    for i in range(Mv.shape[0]):
        try:
            np.linalg.inv(Mv[i])
        except np.linalg.LinAlgError:
            return float(ts[i])
    return float(ts[0])


@dataclass(frozen=True)
class ConditionIReport:
    passed: bool
    worst_defect: float
    worst_defect_t: float
    worst_min_eig: float
    worst_min_eig_t: float


@dataclass(frozen=True)
class ConditionIIReport:
    passed: bool
    mu_supplied: bool
    worst_residual: float
    worst_t: float
    mu_samples: tuple[tuple[float, complex], ...]


@dataclass(frozen=True)
class ConditionIIIReport:
    passed: bool
    worst_max_eig: float
    worst_t: float


@dataclass(frozen=True)
class InitialConditionReport:
    classification: str  # STRICT / NONSTRICT / FAIL
    gap_min_eig: float
    gap_max_eig: float
    u0_doubled_pd: bool


@dataclass(frozen=True)
class CertReport:
    condition_I: ConditionIReport
    condition_II: ConditionIIReport
    condition_III: ConditionIIIReport
    initial: InitialConditionReport
    verdict: str
    grid_points: int
    grid_density: float
    tol: float

    @property
    def conditions_pass(self) -> bool:
        return (self.condition_I.passed and self.condition_II.passed
                and self.condition_III.passed)


def check_condition_I(cert: Certificate, prob: RiccatiProblem,
                      grid: np.ndarray | None = None) -> ConditionIReport:
    """P(t) U(t) Hermitian and PSD on the grid."""
    ts = cert.check_grid(prob) if grid is None else np.asarray(grid, float)
    tol = cert.tol
    Uv = cert.U.eval_many(ts)
    Pv = prob.P.eval_many(ts)
    PU = np.einsum("tij,tjk->tik", Pv, Uv)
    defects = (np.linalg.norm(PU - _batch_adjoint(PU), axis=(1, 2))
               / (1.0 + np.linalg.norm(PU, axis=(1, 2))))
    i_def = int(defects.argmax())
    worst_margin = math.inf
    worst_eig = math.inf
    worst_eig_t = float(ts[0])
    for i, t in enumerate(ts):
        w, _ = eig_hermitian(0.5 * (PU[i] + np.conj(PU[i].T)), tol=np.inf)
        scale = 1.0 + max(abs(float(w[0])), abs(float(w[-1])))
        margin = float(w[0]) + tol * scale
        if margin < worst_margin:
            worst_margin = margin
            worst_eig = float(w[0])
            worst_eig_t = float(t)
    passed = bool(defects[i_def] <= tol and worst_margin >= 0.0)
    return ConditionIReport(passed=passed,
                            worst_defect=float(defects[i_def]),
                            worst_defect_t=float(ts[i_def]),
                            worst_min_eig=worst_eig,
                            worst_min_eig_t=worst_eig_t)


def _drift_residual_matrices(cert: Certificate, prob: RiccatiProblem,
                             ts: np.ndarray) -> np.ndarray:
    """D(t) = R - (U^{-1} Q U)* - P U (Lam* - Lam) - (U^{-1} U')* on the grid."""
    Uv, Uinv = _batch_inv_u(cert, ts)
    dU = cert.U.derivative().eval_many(ts)
    Qv = prob.Q.eval_many(ts)
    Rv = prob.R.eval_many(ts)
    Pv = prob.P.eval_many(ts)
    Lv = cert.Lam.eval_many(ts)
    UinvQU = np.einsum("tij,tjk,tkl->til", Uinv, Qv, Uv)
    UinvdU = np.einsum("tij,tjk->tik", Uinv, dU)
    PU = np.einsum("tij,tjk->tik", Pv, Uv)
    skew = _batch_adjoint(Lv) - Lv
    return (Rv - _batch_adjoint(UinvQU)
            - np.einsum("tij,tjk->tik", PU, skew) - _batch_adjoint(UinvdU))


def check_condition_II(cert: Certificate, prob: RiccatiProblem,
                       grid: np.ndarray | None = None) -> ConditionIIReport:
    """The drift alignment: D(t) must equal mu(t) I with mu real.

    With mu supplied, checks ||D - mu I||_F <= tol pointwise.  Without it,
    extracts mu as the mean diagonal of D and requires the off-diagonal
    mass, the diagonal spread and the imaginary part to sit below tol.
    """
    ts = cert.check_grid(prob) if grid is None else np.asarray(grid, float)
    tol = cert.tol
    n = prob.n
    D = _drift_residual_matrices(cert, prob, ts)
    eye = np.eye(n)
    if cert.mu is not None:
        mu_vals = cert.mu.eval_many(ts)[:, 0, 0]
        resid = np.linalg.norm(D - mu_vals[:, None, None] * eye, axis=(1, 2))
        resid = np.maximum(resid, np.abs(mu_vals.imag))
        mu_hat = mu_vals
    else:
        mu_hat = np.einsum("tii->t", D) / n
        dev = D - mu_hat.real[:, None, None] * eye
        resid = np.linalg.norm(dev, axis=(1, 2))
        resid = np.maximum(resid, np.abs(mu_hat.imag))
    i = int(resid.argmax())
    stride = max(1, len(ts) // 32)
    samples = tuple((float(ts[k]), complex(mu_hat[k]))
                    for k in range(0, len(ts), stride))
    return ConditionIIReport(passed=bool(resid[i] <= tol),
                             mu_supplied=cert.mu is not None,
                             worst_residual=float(resid[i]),
                             worst_t=float(ts[i]),
                             mu_samples=samples)


def check_condition_III(cert: Certificate, prob: RiccatiProblem,
                        grid: np.ndarray | None = None) -> ConditionIIIReport:
    """Dissipativity of the transformed source: S_t + S_t* <= 0 on the grid."""
    ts = cert.check_grid(prob) if grid is None else np.asarray(grid, float)
    tol = cert.tol
    Uv, Uinv = _batch_inv_u(cert, ts)
    dU = cert.U.derivative().eval_many(ts)
    Pv = prob.P.eval_many(ts)
    Qv = prob.Q.eval_many(ts)
    Rv = prob.R.eval_many(ts)
    Sv = prob.S.eval_many(ts)
    Lv = cert.Lam.eval_many(ts)
    dLv = cert.Lam.derivative().eval_many(ts)
    PU = np.einsum("tij,tjk->tik", Pv, Uv)
    Sul = (dLv
           + np.einsum("tij,tjk,tkl->til", Lv, PU, Lv)
           + np.einsum("tij,tjk->tik",
                       np.einsum("tij,tjk->tik", Uinv, dU)
                       + np.einsum("tij,tjk,tkl->til", Uinv, Qv, Uv), Lv)
           + np.einsum("tij,tjk->tik", Lv, Rv)
           + np.einsum("tij,tjk->tik", Uinv, Sv))
    doubled = Sul + _batch_adjoint(Sul)
    worst_margin = -math.inf
    worst_eig = -math.inf
    worst_t = float(ts[0])
    for i, t in enumerate(ts):
        # Symmetrizing an already-Hermitian matrix only scrubs roundoff;
        # the eigenvalues are those of the unhalved sum.
        w, _ = eig_hermitian(0.5 * (doubled[i] + np.conj(doubled[i].T)), tol=np.inf)
        hi = float(w[-1])
        lo = float(w[0])
        scale = 1.0 + max(abs(lo), abs(hi))
        margin = hi - tol * scale
        if margin > worst_margin:
            worst_margin = margin
            worst_eig = hi
            worst_t = float(t)
    return ConditionIIIReport(passed=bool(worst_margin <= 0.0),
                              worst_max_eig=worst_eig, worst_t=worst_t)


def check_initial_condition(cert: Certificate, prob: RiccatiProblem,
                            Z0: np.ndarray) -> InitialConditionReport:
    """Classify the initial gap matrix at t0 as STRICT / NONSTRICT / FAIL."""
    t0 = prob.t0
    _, Uinv, _ = cert.u_inverse(t0)
    Z0 = np.asarray(Z0, dtype=np.complex128)
    Lam0 = cert.Lam.eval(t0)
    A = Uinv @ Z0
    G0 = A + np.conj(A.T) - (Lam0 + np.conj(Lam0.T))
    rep = classify_definiteness(G0, tol=cert.tol)
    u0_doubled = Uinv + np.conj(Uinv.T)
    u0_pd = classify_definiteness(u0_doubled, tol=cert.tol).classification == PD
    if rep.classification == PD:
        cls = STRICT
    elif rep.classification == PSD and u0_pd:
        cls = NONSTRICT
    else:
        cls = FAIL
    return InitialConditionReport(classification=cls,
                                  gap_min_eig=rep.min_eigenvalue,
                                  gap_max_eig=rep.max_eigenvalue,
                                  u0_doubled_pd=u0_pd)


def certify_problem(cert: Certificate, prob: RiccatiProblem,
                    Z0: np.ndarray) -> CertReport:
    """Run all three conditions plus the initial-cone check and combine."""
    grid = cert.check_grid(prob)
    c1 = check_condition_I(cert, prob, grid)
    c2 = check_condition_II(cert, prob, grid)
    c3 = check_condition_III(cert, prob, grid)
    init = check_initial_condition(cert, prob, Z0)
    conditions = c1.passed and c2.passed and c3.passed
    if conditions and init.classification == STRICT:
        verdict = CERTIFIED_STRICT
    elif conditions and init.classification == NONSTRICT:
        verdict = CERTIFIED_NONSTRICT
    else:
        verdict = NOT_CERTIFIED
    return CertReport(condition_I=c1, condition_II=c2, condition_III=c3,
                      initial=init, verdict=verdict, grid_points=len(grid),
                      grid_density=cert.grid_density, tol=cert.tol)


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    g_min_eig: float
    g_alt_min_eig: float  # variant subtracting Lam(t) + Lam*(t0)
    l_doubled_min_eig: float
    violation: bool
    singular_u: bool = False


@dataclass(frozen=True)
class MonitorResult:
    verdict: str  # HOLDS / VIOLATED / NOT_CERTIFIED
    records: tuple[MonitorRecord, ...]
    branch: str | None = None

    @property
    def worst_g_min(self) -> float:
        vals = [r.g_min_eig for r in self.records if not r.singular_u]
        return min(vals) if vals else math.nan


def monitor_invariant(cert: Certificate, prob: RiccatiProblem,
                      traj: Trajectory, report: CertReport | None = None,
                      tol: float = MONITOR_TOL) -> MonitorResult:
    """Track the guaranteed Hermitian gap along a trajectory.

    For each sample: the min eigenvalue of
    G(t) = U^{-1} Z + Z* U^{-*} - Lam(t) - Lam*(t), the printed-variant gap
    subtracting Lam(t) + Lam*(t0) instead (logged for transparency), and the
    min eigenvalue of L + L*.  Monitoring only applies to certified runs;
    otherwise the verdict is NOT_CERTIFIED and no claim is made.
    """
    if report is None:
        report = certify_problem(cert, prob, traj.Z_samples[0])
    if report.verdict == NOT_CERTIFIED:
        return MonitorResult(verdict=NOT_CERTIFIED, records=())
    branch = STRICT if report.verdict == CERTIFIED_STRICT else NONSTRICT
    Lam0 = cert.Lam.eval(prob.t0)
    records = []
    ok = True
    for t, Z in zip(traj.times, traj.Z_samples):
        t = float(t)
        try:
            _, Uinv, _ = cert.u_inverse(t)
        except SingularMatrixError:
            records.append(MonitorRecord(t=t, g_min_eig=math.nan,
                                         g_alt_min_eig=math.nan,
                                         l_doubled_min_eig=math.nan,
                                         violation=False, singular_u=True))
            continue
        Lam = cert.Lam.eval(t)
        A = Uinv @ Z
        doubled = A + np.conj(A.T)
        G = doubled - (Lam + np.conj(Lam.T))
        G_alt = doubled - (Lam + np.conj(Lam0.T))
        L = A - Lam
        LL = L + np.conj(L.T)
        wg, _ = eig_hermitian(0.5 * (G + np.conj(G.T)), tol=np.inf)
        g_min, g_max = float(wg[0]), float(wg[-1])
        wga, _ = eig_hermitian(0.5 * (G_alt + np.conj(G_alt.T)), tol=np.inf)
        wl, _ = eig_hermitian(0.5 * (LL + np.conj(LL.T)), tol=np.inf)
        scale = 1.0 + max(abs(g_min), abs(g_max))
        bad = g_min < -tol * scale
        ok = ok and not bad
        records.append(MonitorRecord(t=t, g_min_eig=g_min,
                                     g_alt_min_eig=float(wga[0]),
                                     l_doubled_min_eig=float(wl[0]),
                                     violation=bool(bad)))
    return MonitorResult(verdict=HOLDS if ok else VIOLATED,
                         records=tuple(records), branch=branch)


def p_adjoint_certificate(prob: RiccatiProblem,
                          Lam: "object | None" = None,
                          mu: "object | None" = None,
                          grid_density: float = 64.0,
                          tol: float = DEFAULT_TOL) -> Certificate:
    """Certificate with U = P*(t), for invertible-valued P.

    Lambda and mu default to zero.  Raises SingularMatrixError("P") when P
    is not invertible at some grid point.
    """
    from .timefn import MatrixTimeFn

    U = prob.P.adjoint()
    cert = Certificate(U=U,
                       Lam=Lam if Lam is not None else MatrixTimeFn.zero(prob.n),
                       mu=mu if mu is not None else MatrixTimeFn.zero(1),
                       grid_density=grid_density, tol=tol)
    ts = cert.check_grid(prob)
    Pv = prob.P.eval_many(ts)
    try:
        Pinv = np.linalg.inv(Pv)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("P", _first_bad_rcond(Pv, ts), 0.0) from None
    n1 = np.abs(Pv).sum(axis=-2).max(axis=-1)
    n2 = np.abs(Pinv).sum(axis=-2).max(axis=-1)
    with np.errstate(all="ignore"):
        rc = 1.0 / (n1 * n2)
    rc = np.where(np.isfinite(rc), rc, 0.0)
    if rc.min() < CERT_RCOND_FLOOR:
        i = int(rc.argmin())
        raise SingularMatrixError("P", float(ts[i]), float(rc[i]))
    return cert


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    solution_min_eig: float
    gap_min_eig: float


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    worst_solution_min: float
    worst_gap_min: float
    rows: tuple[ComparisonRow, ...]
    riccati_status: str
    lyapunov_status: str


def compare_linear_majorant(prob: RiccatiProblem, Z0: np.ndarray,
                        opts: IntegratorOptions | None = None,
                        tol: float = DEFAULT_TOL,
                        grid_density: float = 64.0) -> ComparisonReport:
    """Sandwich check 0 <= Z(t) <= Z_tilde(t) against the linear majorant.

    Hypotheses verified first (P PSD Hermitian, S NSD Hermitian, R = Q*,
    Z0 PSD Hermitian); any failure raises HypothesisViolation naming it.
    The majorant solves the linear equation with drift A = Q*.
    """
    opts = opts or IntegratorOptions()
    Z0 = np.asarray(Z0, dtype=np.complex128)
    span = prob.horizon - prob.t0
    count = max(2, int(round(span * grid_density)) + 1)
    ts = np.linspace(prob.t0, prob.horizon, count)

    Pv = prob.P.eval_many(ts)
    Sv = prob.S.eval_many(ts)
    for i, t in enumerate(ts):
        repP = classify_definiteness(Pv[i], tol=tol)
        if repP.classification not in (PD, PSD):
            raise HypothesisViolation(
                "P_psd_hermitian", f"P({t:.6g}) classified {repP.classification}")
        repS = classify_definiteness(-Sv[i], tol=tol)
        if repS.classification not in (PD, PSD):
            raise HypothesisViolation(
                "S_nsd_hermitian", f"S({t:.6g}) classified as -({repS.classification})")
    Rv = prob.R.eval_many(ts)
    Qv = prob.Q.eval_many(ts)
    mism = np.linalg.norm(Rv - _batch_adjoint(Qv), axis=(1, 2))
    if float(mism.max()) > tol:
        i = int(mism.argmax())
        raise HypothesisViolation(
            "R_equals_Q_star",
            f"||R - Q*||_F = {mism[i]:.3e} at t={ts[i]:.6g}")
    repZ0 = classify_definiteness(Z0, tol=tol)
    if repZ0.classification not in (PD, PSD):
        raise HypothesisViolation("Z0_psd_hermitian",
                                  f"Z0 classified {repZ0.classification}")

    traj = integrate_riccati(prob, Z0, opts)
    tilde = integrate_lyapunov(prob.Q.adjoint(), prob.S, Z0,
                               prob.t0, prob.horizon, opts)
    rows = []
    worst_sol = math.inf
    worst_gap = math.inf
    passed = traj.status == COMPLETED and tilde.status == COMPLETED
    for t, Z in zip(traj.times, traj.Z_samples):
        t = float(t)
        Zt = tilde.dense.eval(t)
        wz, _ = eig_hermitian(0.5 * (Z + np.conj(Z.T)), tol=np.inf)
        gap = Zt - Z
        wgap, _ = eig_hermitian(0.5 * (gap + np.conj(gap.T)), tol=np.inf)
        z_min, z_max = float(wz[0]), float(wz[-1])
        g_min, g_max = float(wgap[0]), float(wgap[-1])
        z_scale = 1.0 + max(abs(z_min), abs(z_max))
        g_scale = 1.0 + max(abs(g_min), abs(g_max))
        if z_min < -tol * z_scale or g_min < -tol * g_scale:
            passed = False
        worst_sol = min(worst_sol, z_min)
        worst_gap = min(worst_gap, g_min)
        rows.append(ComparisonRow(t=t, solution_min_eig=z_min, gap_min_eig=g_min))
    return ComparisonReport(passed=bool(passed), worst_solution_min=worst_sol,
                            worst_gap_min=worst_gap, rows=tuple(rows),
                            riccati_status=traj.status,
                            lyapunov_status=tilde.status)


@dataclass(frozen=True)
class ScanRow:
    parameter: float
    initial_class: str
    certified: bool
    status: str
    t_escape: float | None
    gap_min_eig: float


def scan_initial_values(cert: Certificate, prob: RiccatiProblem,
                        family: "list[tuple[float, np.ndarray]]",
                        opts: IntegratorOptions | None = None) -> list[ScanRow]:
    """Classify and integrate a parameterized family of initial values.

    The certificate conditions are Z0-independent and checked once; each row
    records the cone classification of its Z0, whether the run is certified,
    and the observed termination status.
    """
    opts = opts or IntegratorOptions()
    grid = cert.check_grid(prob)
    try:
        conditions_ok = (check_condition_I(cert, prob, grid).passed
                         and check_condition_II(cert, prob, grid).passed
                         and check_condition_III(cert, prob, grid).passed)
    except SingularMatrixError:
        conditions_ok = False
    rows = []
    for param, Z0 in family:
        try:
            init = check_initial_condition(cert, prob, Z0)
            cls = init.classification
            gap_min = init.gap_min_eig
        except SingularMatrixError:
            cls = FAIL
            gap_min = math.nan
        traj = integrate_riccati(prob, Z0, opts)
        rows.append(ScanRow(parameter=float(param), initial_class=cls,
                            certified=bool(conditions_ok and cls != FAIL),
                            status=traj.status, t_escape=traj.t_escape,
                            gap_min_eig=gap_min))
    return rows
