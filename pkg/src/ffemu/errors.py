"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
numerical failures exit 2, and I/O problems (plain ``OSError``) exit 3.
"""


class FfemuError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FfemuError):
    """Invalid model, run configuration, or infeasible constraint setup."""


class ShapeError(FfemuError, ValueError):
    """Array dimension or length mismatch."""


class DomainError(FfemuError, ValueError):
    """Argument outside its mathematical domain (negative stiffness, bad alpha, ...)."""


class DefiniteMatrixError(FfemuError):
    """A matrix required to be positive definite is not."""


class ConvergenceError(FfemuError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class DegenerateVectorError(FfemuError, ValueError):
    """A zero (or otherwise degenerate) vector where a direction is required."""


class EvaluationError(FfemuError, RuntimeError):
    """Objective returned a non-finite value; carries the offending point."""

    def __init__(self, message: str, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class DiagnosticsError(FfemuError, RuntimeError):
    """A sampler or optimizer produced statistics indicating a broken setup."""
