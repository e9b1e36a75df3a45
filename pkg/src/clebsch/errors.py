"""Exception types shared across the package."""


class ClebschError(Exception):
    """Base class for all errors raised by :mod:`clebsch`."""


class GroupMismatch(ClebschError, ValueError):
    """Operands belong to different Lie groups."""


class NonConvergence(ClebschError, ArithmeticError):
    """An iterative solve (Newton, fixed point, projection) did not converge."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularMetric(ClebschError, ArithmeticError):
    """A spatial metric lost positive-definiteness during evolution."""


class HypothesisViolation(ClebschError, ValueError):
    """A diagnostic was requested whose mathematical precondition is not met.

    Raised e.g. when an Euler-Poincare residual is asked for a Hamiltonian
    that is not flagged as group invariant.
    """


class ConstraintViolation(ClebschError, ValueError):
    """Initial data do not satisfy the constraints required by an operation."""
