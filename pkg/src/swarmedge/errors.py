"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad value, inconsistent keys, dimension mismatch."""


class NumericError(ArithmeticError):
    """A computation produced NaN or Inf."""


class DataFormatError(ValueError):
    """Malformed dataset file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
