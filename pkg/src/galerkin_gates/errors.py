"""Exception types shared across the package."""


class DomainError(ValueError):
    """A level index, truncation size or other argument is out of range."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced non-finite values."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvalidControlError(ValueError):
    """A control law violates its construction constraints."""


class NoTransitionError(ValueError):
    """Two levels are not directly coupled."""


class ConfigError(ValueError):
    """A scenario configuration is malformed."""
