"""
Lab Exception Classes
=====================

Custom exceptions for curvature, level-set and verification failures.

Every class carries a ``status`` string. The identity suite records that
string per point instead of propagating the exception, so a degenerate
point shows up in the report with an explicit reason.
"""

from typing import Optional


class LabError(Exception):
    """Base exception for soliton_lab errors."""

    status = "error"


class DegenerateMetricError(LabError):
    """Raised when a metric jet is not positive definite or not finite."""

    status = "degenerate-metric: skipped"

    def __init__(self, min_eigenvalue: float, threshold: float = 1e-12):
        self.min_eigenvalue = min_eigenvalue
        self.threshold = threshold
        self.message = (
            f"Degenerate metric: smallest eigenvalue {min_eigenvalue:.3e} "
            f"is below {threshold:.1e}"
        )
        super().__init__(self.message)


class InsufficientJetOrderError(LabError):
    """Raised when a computation needs more derivatives than were supplied."""

    status = "insufficient jet order"

    def __init__(self, required: int, available: int, what: str = "computation"):
        self.required = required
        self.available = available
        self.what = what
        self.message = (
            f"{what} needs jet order {required}, only {available} available"
        )
        super().__init__(self.message)


class GradientCriticalError(LabError):
    """Raised when |grad f| is below the gradient cutoff."""

    status = "gradient-critical: skipped"

    def __init__(self, grad_norm: float, cutoff: float):
        self.grad_norm = grad_norm
        self.cutoff = cutoff
        self.message = (
            f"Critical point of the potential: |grad f| = {grad_norm:.3e} "
            f"<= cutoff {cutoff:.1e}"
        )
        super().__init__(self.message)


class MeanCurvatureDegenerateError(LabError):
    """Raised when H is too small for the umbilical ratio."""

    status = "mean-curvature-degenerate: skipped"

    def __init__(self, mean_curvature: float, cutoff: float):
        self.mean_curvature = mean_curvature
        self.cutoff = cutoff
        self.message = (
            f"Mean curvature H = {mean_curvature:.3e} <= cutoff {cutoff:.1e}"
        )
        super().__init__(self.message)


class EigenvectorDegenerateError(LabError):
    """Raised when principal directions are needed at an umbilical point."""

    status = "umbilical: not applicable"

    def __init__(self, gap: float, what: str = "principal directions"):
        self.gap = gap
        self.what = what
        self.message = (
            f"Umbilical point (principal gap {gap:.3e}): {what} undefined"
        )
        super().__init__(self.message)


class ThetaSingularError(LabError):
    """Raised when lambda|grad f|^2 - 1 vanishes or lambda is undefined."""

    status = "theta-singular: skipped"

    def __init__(self, denominator: Optional[float]):
        self.denominator = denominator
        if denominator is None:
            self.message = "Weight lambda = 1/(R - R_nunu) is undefined (R = R_nunu)"
        else:
            self.message = (
                f"Theta denominator lambda|grad f|^2 - 1 = {denominator:.3e} is singular"
            )
        super().__init__(self.message)


class UnsupportedModelError(LabError):
    """Raised when an operation is not defined for a model."""

    status = "unsupported: skipped"

    def __init__(self, model_name: str, operation: str):
        self.model_name = model_name
        self.operation = operation
        self.message = f"Operation '{operation}' is not supported for model '{model_name}'"
        super().__init__(self.message)


class ChartSingularError(LabError):
    """Raised when a point lies on a coordinate singularity of a chart."""

    status = "chart-singular: skipped"

    def __init__(self, coords, reason: str):
        self.coords = tuple(float(c) for c in coords)
        self.reason = reason
        self.message = f"Chart-singular point {self.coords}: {reason}"
        super().__init__(self.message)


class OutOfRangeError(LabError):
    """Raised when a profile is evaluated outside its integrated grid."""

    status = "out-of-range: skipped"

    def __init__(self, r: float, r_min: float, r_max: float):
        self.r = r
        self.r_min = r_min
        self.r_max = r_max
        self.message = f"r = {r:.6g} outside profile range [{r_min:.6g}, {r_max:.6g}]"
        super().__init__(self.message)


class IntegrationFailureError(LabError):
    """Raised when an ODE integration stops before reaching its target."""

    status = "integration-failure"

    def __init__(self, last_valid_r: float, reason: str):
        self.last_valid_r = last_valid_r
        self.reason = reason
        self.message = f"Integration failed after r = {last_valid_r:.6g}: {reason}"
        super().__init__(self.message)


class ReprojectionError(LabError):
    """Raised when a point cannot be pulled back onto its level set."""

    status = "reprojection-failure"

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        self.message = (
            f"Level-set re-projection left |f - t| = {residual:.3e} "
            f"(tolerance {tolerance:.1e}); step too large?"
        )
        super().__init__(self.message)


class ChartExtentError(LabError):
    """Raised when a subnormal chart is queried beyond its extent."""

    status = "chart-extent: skipped"

    def __init__(self, coords, extent: float):
        self.coords = tuple(float(c) for c in coords)
        self.extent = extent
        self.message = f"Chart coordinates {self.coords} exceed extent {extent:.3g}"
        super().__init__(self.message)


class PreconditionError(LabError, ValueError):
    """Raised when numeric arguments violate an operation's preconditions."""

    status = "precondition"

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class DomainError(LabError, ValueError):
    """Raised when a log-log fit receives a nonpositive value."""

    status = "degenerate quantity"

    def __init__(self, r: float, value: float):
        self.r = r
        self.value = value
        self.message = f"Nonpositive value {value:.6g} at r = {r:.6g}; cannot take logarithms"
        super().__init__(self.message)


class ConfigError(LabError, ValueError):
    """Raised for unreadable, malformed or invalid run configuration."""

    status = "config"

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        self.message = message if line_number is None else f"line {line_number}: {message}"
        super().__init__(self.message)
