"""Exception types shared across the package."""


class NumericFailure(RuntimeError):
    """A linear solve or training step produced a non-finite or unusable result."""


class ParseError(ValueError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
