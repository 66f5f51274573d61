

class HdpriorError(Exception):
    """Base class for every error raised by hdprior.

    `exit_code` is what the command-line tool returns when the error escapes.
    """
    exit_code = 1


class ConfigError(HdpriorError, ValueError):
    exit_code = 2


class DataError(HdpriorError, ValueError):
    exit_code = 3


class ShapeError(DataError):
    pass


class SingularityError(DataError):
    pass


class DomainError(HdpriorError, ValueError):
    """A mean or linear predictor fell outside the family's domain."""
    exit_code = 3


class NonConvergenceError(HdpriorError, RuntimeError):
    exit_code = 4

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class BoundaryError(NonConvergenceError):
    pass


class SamplerError(HdpriorError, RuntimeError):
    exit_code = 4


class EvidenceError(HdpriorError, RuntimeError):
    exit_code = 5


class InterpolationRangeError(HdpriorError, ValueError):
    exit_code = 5
