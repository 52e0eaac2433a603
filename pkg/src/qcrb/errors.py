"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class BoundaryError(ValidationError):
    """A Bloch vector lies on or beyond the pure-state boundary."""


class NotPositiveSemidefiniteError(ValidationError):
    """A matrix required to be PSD has a genuinely negative eigenvalue."""


class SingularityError(ValidationError):
    """A matrix (or scalar information value) required to be invertible is singular."""


class InfeasibilityError(ValidationError):
    """Affine constraints of a minimization problem admit no solution."""


class ConvergenceError(RuntimeError):
    """The numerical minimizer failed to converge; carries the best value found."""

    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value
