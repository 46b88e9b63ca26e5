"""Exception types shared across the package."""

from __future__ import annotations


class RiccatiError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrixError(RiccatiError):
    """A matrix that must be inverted is singular to working precision.

    ``what`` names the offending matrix ("M", "U", "P", "Phi") and ``t`` is
    the time at which the inversion was attempted, when applicable.
    """

    def __init__(self, what: str = "M", t: float | None = None,
                 rcond: float | None = None):
        self.what = what
        self.t = t
        self.rcond = rcond
        loc = f" at t={t:.6g}" if t is not None else ""
        cond = f" (rcond={rcond:.3e})" if rcond is not None else ""
        super().__init__(f"SINGULAR: {what}{loc} is not invertible{cond}")


class NotHermitianError(RiccatiError):
    """A matrix required to be Hermitian has too large a defect."""

    def __init__(self, defect: float, tol: float):
        self.defect = defect
        self.tol = tol
        super().__init__(
            f"NOT_HERMITIAN: hermiticity defect {defect:.3e} exceeds tolerance {tol:.3e}")


class StepOverflowError(RiccatiError):
    """A Runge-Kutta stage produced non-finite entries."""


class HypothesisViolation(RiccatiError):
    """A comparison-theorem hypothesis fails numerically.

    ``hypothesis`` names the failed requirement, e.g. "P_psd_hermitian".
    """

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        msg = f"HYPOTHESIS_VIOLATION: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConfigError(RiccatiError):
    """Base class for configuration-file problems."""


class ConfigParseError(ConfigError):
    """Malformed configuration; ``field`` is the dotted path to the bad value."""

    def __init__(self, field: str, detail: str):
        self.field = field
        super().__init__(f"PARSE_ERROR at '{field}': {detail}")


class DimensionMismatchError(ConfigError):
    """Matrix dimensions are inconsistent; ``field`` names the offender."""

    def __init__(self, field: str, detail: str):
        self.field = field
        super().__init__(f"DIM_MISMATCH at '{field}': {detail}")
