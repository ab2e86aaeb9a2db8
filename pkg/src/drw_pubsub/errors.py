class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class ParseError(ValueError):
    """An input document is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WalkStateError(RuntimeError):
    """A walk transition was requested from a state that does not allow it."""


class ConfigError(ValueError):
    """An experiment configuration is invalid or infeasible."""
