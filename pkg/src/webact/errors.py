"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input or invariant violation. Maps to CLI exit code 1."""


class ParseError(ValidationError):
    """Malformed external file. Carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConvergenceError(ValidationError):
    """Iteration budget exhausted before the residual dropped below tolerance."""

    def __init__(self, message: str, residual_l1: float, n_iter: int):
        self.residual_l1 = residual_l1
        self.n_iter = n_iter
        super().__init__(message)


class DegenerateGraphError(ValidationError):
    """Graph too small for the requested construction (e.g. single node)."""


class ShortageError(ValidationError):
    """Not enough samples to satisfy a quota or injection request."""
