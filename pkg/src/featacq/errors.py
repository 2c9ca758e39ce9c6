"""Exception types shared across the package."""


class FeatacqError(Exception):
    """Base class for all errors raised by this package."""


class DataError(FeatacqError):
    """Malformed or unusable dataset input."""


class SchemaError(FeatacqError):
    """Schema file or schema/data inconsistency."""


class ConfigError(FeatacqError):
    """Invalid configuration value."""


class TrainingError(FeatacqError):
    """Optimization failed (e.g. loss diverged)."""


class ModelFormatError(FeatacqError):
    """Model file is unreadable or does not match the expected schema."""


class SessionStateError(FeatacqError):
    """An acquisition-session operation was called in an invalid state."""


class BudgetError(FeatacqError):
    """Requested acquisition does not fit the remaining budget."""

    def __init__(self, message, remaining=None):
        super().__init__(message)
        self.remaining = remaining
