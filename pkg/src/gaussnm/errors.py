"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class QuadratureError(NumericError):
    """Adaptive quadrature did not converge."""


class ConsistencyError(NumericError):
    """Two independent evaluation routes disagree beyond tolerance."""
