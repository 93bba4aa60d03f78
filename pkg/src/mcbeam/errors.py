"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """An argument violates a documented precondition."""


class InvalidState(RuntimeError):
    """An object is not in a state that permits the requested operation."""


class DegenerateInput(ValueError):
    """Structurally degenerate data (e.g. an all-zero covariance) that a
    solver cannot make progress on."""


class ParseError(ValueError):
    """Malformed channel or config file. Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(RuntimeError):
    """A solver exhausted its iteration budget. Carries the last residuals."""

    def __init__(self, message, primal_residual=None, dual_residual=None,
                 iterations=None):
        super().__init__(message)
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        self.iterations = iterations
