"""Matrix Riccati ODE toolkit: adaptive integration with finite-escape-time
detection, continuation through the companion linear system, and numerical
certification of global existence via (U, Lambda, mu) certificates.
"""

from .errors import (ConfigError, ConfigParseError, DimensionMismatchError,
                     HypothesisViolation, NotHermitianError, RiccatiError,
                     SingularMatrixError, StepOverflowError)
from .matrices import (DEFAULT_TOL, DefinitenessReport, adjoint,
                       classify_definiteness, determinant, eig_hermitian,
                       hermitian_part, hermiticity_defect, inverse, trace)
from .timefn import BasisTerm, MatrixTimeFn, is_hermitian_valued
from .problem import (Certificate, RiccatiProblem, TransformedProblem,
                      identity_certificate, q_ul, r_ul, rhs, s_ul,
                      transform_solution, untransform_solution)
from .integrate import (BLOWUP, COMPLETED, PHI_SINGULAR, STEP_UNDERFLOW,
                        IntegratorOptions, LinearFlow, RadonValue, Trajectory,
                        adaptive_simpson, first_phi_singularity,
                        integrate_linear_system, integrate_lyapunov,
                        integrate_riccati, liouville_residual, radon_continue,
                        step_rk)
from .certify import (CERTIFIED_NONSTRICT, CERTIFIED_STRICT, FAIL, HOLDS,
                      NONSTRICT, NOT_CERTIFIED, STRICT, VIOLATED, CertReport,
                      ComparisonReport, MonitorRecord, MonitorResult, ScanRow,
                      certify_problem, check_condition_I, check_condition_II,
                      check_condition_III, check_initial_condition,
                      compare_linear_majorant, monitor_invariant,
                      p_adjoint_certificate, scan_initial_values)
from .lemmas import LemmaResult, run_lemma_suites

__version__ = "0.1.0"

__all__ = [
    "BLOWUP", "BasisTerm", "CERTIFIED_NONSTRICT", "CERTIFIED_STRICT",
    "COMPLETED", "CertReport", "Certificate", "ComparisonReport",
    "ConfigError", "ConfigParseError", "DEFAULT_TOL", "DefinitenessReport",
    "DimensionMismatchError", "FAIL", "HOLDS", "HypothesisViolation",
    "IntegratorOptions", "LemmaResult", "LinearFlow", "MatrixTimeFn",
    "MonitorRecord", "MonitorResult", "NONSTRICT", "NOT_CERTIFIED",
    "NotHermitianError", "PHI_SINGULAR", "RadonValue", "RiccatiError",
    "RiccatiProblem", "STEP_UNDERFLOW", "STRICT", "ScanRow",
    "SingularMatrixError", "StepOverflowError", "Trajectory",
    "TransformedProblem", "VIOLATED", "adaptive_simpson", "adjoint",
    "certify_problem", "check_condition_I", "check_condition_II",
    "check_condition_III", "check_initial_condition",
    "classify_definiteness", "compare_linear_majorant", "determinant",
    "eig_hermitian", "first_phi_singularity", "hermitian_part",
    "hermiticity_defect", "identity_certificate", "integrate_linear_system",
    "integrate_lyapunov", "integrate_riccati", "inverse",
    "is_hermitian_valued", "liouville_residual", "monitor_invariant",
    "p_adjoint_certificate", "q_ul", "r_ul", "radon_continue", "rhs",
    "run_lemma_suites", "s_ul", "scan_initial_values", "step_rk", "trace",
    "transform_solution", "untransform_solution",
]
