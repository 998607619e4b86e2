"""Exception and warning types shared across the package."""


class EvaluationError(ValueError):
    """An exponent or coefficient evaluated to a non-finite value."""


class DomainError(ValueError):
    """A quantity is undefined for the given arguments (e.g. p <= 1, N <= p*s)."""


class PreconditionError(ValueError):
    """An operation was called outside its documented preconditions."""


class SingularKirchhoffError(DomainError):
    """The Kirchhoff coefficient is singular at the requested point."""


class StallError(RuntimeError):
    """The line search could not decrease the energy."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class AccuracyWarning(UserWarning):
    """Quadrature error estimate exceeds the requested tolerance."""


class SingularKirchhoffWarning(UserWarning):
    """A residual was assembled with the 0 * inf := 0 convention at u = 0."""
