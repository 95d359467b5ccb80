class AlfcgError(Exception):
    pass


class InvalidParameterError(AlfcgError, ValueError):
    pass


class DegenerateDirectionError(AlfcgError, ValueError):
    pass


class ConfigError(AlfcgError, ValueError):
    pass


class IdxFormatError(AlfcgError, ValueError):
    pass


class InfeasibleStartError(AlfcgError, ValueError):
    pass


class NonFiniteObjectiveError(AlfcgError, FloatingPointError):
    """Raised when F(x_t) stops being finite; ``trace`` holds the records so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class LineSearchError(AlfcgError, RuntimeError):
    pass
