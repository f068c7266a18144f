"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical or numerical parameter violates its preconditions."""


class PlanningError(RuntimeError):
    """A controller backward pass failed (e.g. unreachable terminal state)."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach tolerance within its iteration cap."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
