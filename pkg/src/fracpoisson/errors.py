"""Exception hierarchy for numerical and validation failures."""

from typing import Any, Dict, Optional


class FracPoissonError(RuntimeError):
    """Base class for errors raised by this package."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context = dict(context or {})

    def describe(self) -> str:
        """Return the message followed by the failing inputs, if any."""
        if not self.context:
            return str(self)
        details = ', '.join(f'{key}={value!r}' for key, value in self.context.items())
        return f'{self} ({details})'


class NumericalError(FracPoissonError):
    """Raised when a computation cannot deliver the requested accuracy."""


class PrecisionLoss(NumericalError):
    """Raised when an alternating series cancels beyond the configured guard."""


class NonConvergence(NumericalError):
    """Raised when a series does not reach its tolerance within max_terms."""


class ToleranceNotMet(NumericalError):
    """Raised when adaptive quadrature exhausts its evaluation budget."""


class ConstraintError(NumericalError):
    """Raised when n = Lambda(z0 t^beta) cannot be solved for t."""


class DomainError(FracPoissonError, ValueError):
    """Raised when an argument violates an operation's preconditions."""


class ConfigError(DomainError):
    """Raised when configuration values are missing or malformed."""
