"""Exception hierarchy shared by all modules."""


class KanThermError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KanThermError, ValueError):
    """An argument lies outside the domain of a model function."""


class ShapeError(KanThermError, ValueError):
    """Array or vector dimensions do not match the model contract."""


class ConfigError(KanThermError, ValueError):
    """Invalid configuration, roster, or search space."""


class ParseError(KanThermError, ValueError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelFileError(KanThermError):
    """A model container is corrupt or has an unsupported version."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class NumericalError(KanThermError, ArithmeticError):
    """Non-finite state, loss, or gradient."""


class IntegrationError(NumericalError):
    """ODE integration produced an invalid state."""

    def __init__(self, message, time=None):
        if time is not None:
            message = f"t={time:g} s: {message}"
        super().__init__(message)
        self.time = time
