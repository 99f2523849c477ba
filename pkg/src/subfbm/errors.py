"""Exception hierarchy shared by all subfbm modules."""


class SubfbmError(Exception):
    """Base class for library errors."""


class DomainError(SubfbmError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class QuadratureError(SubfbmError, ArithmeticError):
    """A quadrature did not reach its tolerance.

    ``estimate`` and ``error_bound`` carry the best value found and its
    estimated absolute error; ``location`` optionally names where it failed
    (for instance the ``(k, i)`` cell of a kernel matrix).
    """

    def __init__(self, message, estimate=None, error_bound=None, location=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
        self.location = location


class CalibrationError(SubfbmError, ArithmeticError):
    """Calibration of a normalizing constant failed its post-condition check."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class CacheError(SubfbmError, IOError):
    """A cached matrix file is malformed or does not match its checksum."""


class EnsembleError(SubfbmError, RuntimeError):
    """An ensemble run stopped early; ``completed`` paths finished before the failure."""

    def __init__(self, message, completed=0):
        super().__init__(message)
        self.completed = completed
