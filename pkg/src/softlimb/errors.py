"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates the domain of an operation (non-positive length, etc.)."""


class UnstableSystemError(DomainError):
    """The H-infinity norm is infinite because the system has poles on or right of the axis."""


class InterconnectionError(DomainError):
    """The M-Delta interconnection is ill-posed (singular algebraic loop)."""


class InstabilityError(RuntimeError):
    """A closed-loop simulation diverged. Carries the trace recorded up to that point."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(DomainError):
    """Configuration file could not be parsed or failed validation."""
