"""Exceptions shared by every selftest-lab module."""


class SelfTestException(Exception):
    """Base exception for selftest-lab errors."""

    pass


class ContractViolation(SelfTestException, ValueError):
    """Raised when an input violates an operation's precondition."""

    pass


class DimensionMismatch(ContractViolation):
    """Raised when shapes or declared dimensions disagree."""

    pass


class BudgetExceeded(ContractViolation):
    """Raised when an enumeration or dense materialisation is over budget."""

    pass


class DegenerateSpectrum(ContractViolation):
    """Raised when a simple top eigenvalue is required but not present."""

    pass


class CompatibilityError(SelfTestException):
    """Raised when a strategy does not fit a game or a witness its strategies."""

    pass


class SchemaError(SelfTestException, ValueError):
    """Raised when an input file does not match its schema."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class InvariantViolation(SelfTestException):
    """Raised in strict mode when a certified inequality fails."""

    pass


class TruncationError(SelfTestException):
    """Raised when an operator leaks outside the finite M-infinity truncation."""

    pass
