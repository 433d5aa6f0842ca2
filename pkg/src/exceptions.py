"""Error hierarchy for canonlab."""

from typing import Optional


class CanonlabError(Exception):
    """Base class for all canonlab errors."""


class ConfigError(CanonlabError, ValueError):
    """Invalid experiment or application configuration."""


class PreconditionError(CanonlabError, ValueError):
    """An operation was called with inputs that violate its preconditions."""


class NumericalError(CanonlabError, ArithmeticError):
    """A computation produced non-finite values or failed to converge."""

    def __init__(self, message: str, condition_number: Optional[float] = None):
        super().__init__(message)
        self.condition_number = condition_number


class DivergenceError(NumericalError):
    """SGD produced a non-finite loss. ``trace`` holds the rows up to the failure."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
