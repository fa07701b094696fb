"""Exception hierarchy.

Each error class carries the CLI exit code it maps to.
"""


class MvEntropyError(Exception):
    exit_code = 1


class ConfigError(MvEntropyError, ValueError):
    exit_code = 2


class SpaceMismatchError(MvEntropyError, ValueError):
    """Raised when elements of structurally different spaces are combined."""

    exit_code = 3


class DomainError(MvEntropyError, ValueError):
    exit_code = 3


class UndefinedSumError(DomainError):
    """Partial addition a + b is undefined because a + b exceeds the unit."""

    def __init__(self, point, total):
        self.point = point
        self.total = total
        super().__init__(f"a + b exceeds the unit at point {point} (sum = {total})")


class PreconditionError(DomainError):
    pass


class InvariantViolation(MvEntropyError):
    exit_code = 3


class NotIdempotentError(DomainError):
    pass


class BudgetExceededError(MvEntropyError):
    """Exact enumeration would exceed the configured cell or combination budget."""

    exit_code = 4


class IsomorphismError(MvEntropyError, ValueError):
    exit_code = 5
