"""Exception hierarchy shared by every module."""


class MwIndexError(Exception):
    """Base class for all package errors."""


class DomainError(MwIndexError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedPotentialError(MwIndexError, TypeError):
    """The requested operation has no path for this potential branch."""


class SolverError(MwIndexError, RuntimeError):
    """Radial integration or partial-wave summation failed to converge.

    ``diagnostics`` carries whatever the solver knew when it gave up
    (step count, matching residual, last angular momentum, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class QuadratureError(MwIndexError, RuntimeError):
    """Adaptive quadrature exhausted its node budget."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(MwIndexError, ValueError):
    """A run configuration could not be parsed or is inconsistent."""
