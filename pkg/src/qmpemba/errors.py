"""Exception hierarchy shared by the library and the CLI."""


class QMpembaError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(QMpembaError, ValueError):
    """Invalid physical or numerical parameter."""


class ContractError(QMpembaError, ValueError):
    """An input violated a precondition (shape, normalization, ...)."""


class NumericalError(QMpembaError, ArithmeticError):
    """A numerical routine failed to converge or produced garbage."""


class AccuracyError(NumericalError):
    """Integration drifted past its conservation tolerance."""


class DegeneracyError(NumericalError):
    """The Liouvillian is (numerically) non-diagonalizable."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class CompletenessError(NumericalError):
    """A mode expansion failed to reconstruct its input."""


class InsufficientDataError(QMpembaError, ValueError):
    """Too few usable samples for a fit or a crossing scan."""


class NegativeTemperatureError(ParameterError):
    """Energy at or above the infinite-temperature mean."""


class OutOfSpectrumError(ParameterError):
    """Energy at or below the ground-state energy."""


class ConfigParseError(QMpembaError):
    """Malformed configuration text."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ConfigValidationError(QMpembaError):
    """Configuration parsed but a field holds an invalid value."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
