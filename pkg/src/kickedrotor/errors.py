"""Exception types shared across the package."""


class KickedRotorError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(KickedRotorError, ValueError):
    """An argument violates an operation's precondition."""


class NumericError(KickedRotorError, ArithmeticError):
    """Non-finite input or output in a numeric routine."""


class NumericGuardError(KickedRotorError, RuntimeError):
    """A runtime numeric guard tripped (norm drift, momentum truncation)."""


class DomainError(KickedRotorError, ValueError):
    """Input lies outside the mathematical domain of an analysis routine."""
