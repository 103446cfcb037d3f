"""Exception hierarchy shared by the library and the command-line front end."""


class ImgmError(Exception):
    """Base class for all library errors."""


class ValidationError(ImgmError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """A text input could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(ParseError):
    """A text input is well formed but lacks a required field."""


class ConfigurationError(ValidationError):
    """A combination of parameters is unsupported or infeasible."""


class ContractError(ImgmError, RuntimeError):
    """An internal postcondition failed, usually because a caller passed a non-base."""
