"""Exception types shared across the package."""


class StreamForestError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(StreamForestError, ValueError):
    """A config object or CLI parameter combination is invalid."""


class DataError(StreamForestError, ValueError):
    """A data file is malformed.  Carries the offending line when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(DataError):
    """Data does not match the declared or expected schema."""
