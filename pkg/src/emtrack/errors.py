"""Exception hierarchy shared by all pipeline stages."""


class EMTrackError(Exception):
    """Base class for all tracking errors."""


class SingularPoint(EMTrackError, ValueError):
    """Field evaluated too close to a coil center or wire."""


class SourceStopped(EMTrackError):
    """The acquisition source has shut down in an orderly way."""


class NyquistViolation(EMTrackError, ValueError):
    pass


class DuplicateFrequency(EMTrackError, ValueError):
    pass


class LengthMismatch(EMTrackError, ValueError):
    pass


class DegenerateMeasurement(EMTrackError, ValueError):
    """All measured amplitudes are effectively zero."""


class NumericalBreakdown(EMTrackError, ArithmeticError):
    """Damped normal equations stayed singular at maximal damping."""


class NoConvergence(EMTrackError):
    """Every solver start failed to converge."""


class DeviceNameTooLong(EMTrackError, ValueError):
    pass


class BindFailure(EMTrackError, OSError):
    pass


class ConfigError(EMTrackError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(ConfigError, ValueError):
    pass


class GridOutOfBounds(EMTrackError, ValueError):
    pass
