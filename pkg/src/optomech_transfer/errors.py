"""Exception types raised by the channel models."""


class DomainError(ValueError):
    """An argument lies outside the physical domain of an operation."""


class SingularityError(ArithmeticError):
    """The added-noise variance diverges (total transmittance reached 1)."""


class TruncationError(ValueError):
    """A Fock-space truncation is too small for the requested accuracy."""

    def __init__(self, message, suggested_dim=None):
        super().__init__(message)
        self.suggested_dim = suggested_dim


class ConfigurationError(ValueError):
    """Integration settings cannot resolve the dynamics."""
