"""Exception hierarchy shared by the library and the command line."""


class GSPError(Exception):
    """Base class for every error raised by :mod:`gsphqc`."""


class InputError(GSPError, ValueError):
    """An argument is outside its documented domain."""


class ConstructionError(GSPError):
    """A structure could not be built (e.g. no recoverable sampling set)."""


class ConfigError(GSPError, ValueError):
    """An experiment configuration is missing fields or inconsistent."""


class InstabilityError(GSPError, ArithmeticError):
    """A requested step size lies outside the mean-square stability region."""


class DegenerateOperatorError(GSPError, ArithmeticError):
    """The weighted operator has no positive eigenvalue."""


class DatasetError(GSPError):
    """Base class for station-file problems."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(DatasetError):
    """A row of a station file could not be parsed."""


class SchemaError(DatasetError):
    """Rows of a station file disagree on the series length."""
