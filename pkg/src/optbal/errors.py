"""Exception types used across the package."""


class OptbalError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OptbalError, ValueError):
    """Invalid configuration: bad dimensions, out-of-range parameters, schema violations."""


class DomainError(OptbalError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class CapabilityError(OptbalError):
    """Request exceeds an implemented limit (derivative order, jet depth, grid size)."""


class EvaluationError(OptbalError, ArithmeticError):
    """Non-finite value produced during a pointwise evaluation.

    Carries the offending point in ``point``.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class IntegrationError(OptbalError, RuntimeError):
    """Time integration failed (blow-up / non-finite state).

    ``time`` and ``state`` hold the last good step when available.
    """

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class ResourceError(OptbalError, RuntimeError):
    """A configured budget (step count, enumeration size) would be exceeded."""


class SolverError(OptbalError, RuntimeError):
    """A boundary-value solver failed to converge.

    ``best_residual`` holds the smallest residual seen; ``history`` the
    per-iteration residuals or iterate changes.
    """

    def __init__(self, message, best_residual=None, history=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.history = history or []


class DataError(OptbalError, ValueError):
    """Input data unusable for the requested analysis (too few points, I >= d, ...)."""
