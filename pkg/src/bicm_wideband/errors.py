"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition or a type invariant."""


class NoSolutionError(ArithmeticError):
    """The requested equation has no admissible solution."""


class DivergedError(NoSolutionError):
    """The low-SNR trade-off has no finite positive bandwidth ratio."""
