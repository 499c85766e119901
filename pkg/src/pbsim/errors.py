"""Exception and warning types raised across the package."""


class PBSimError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(PBSimError, ValueError):
    pass


class InvalidEmbeddingError(PBSimError, ValueError):
    pass


class InvalidDensityMatrixError(PBSimError, ValueError):
    pass


class DivergentDriveError(PBSimError, ValueError):
    pass


class ExpansionInvalidError(PBSimError, ValueError):
    pass


class InvalidFrequencyError(PBSimError, ValueError):
    pass


class SolverError(PBSimError):
    """Numerical failure inside a solver."""


class DegenerateSteadyStateError(SolverError):
    pass


class TruncationTooSmallError(SolverError):
    pass


class StepSizeError(SolverError):
    pass


class UndefinedCorrelationError(PBSimError, ValueError):
    """Mean occupation too small for a normalized correlation to be meaningful."""


class BoundaryMinimumError(PBSimError):
    """Coarse-grid minimum sits on the edge of the sweep range."""


class ConfigError(PBSimError, ValueError):
    pass


class RWAWarning(UserWarning):
    """A rotating-wave or quasi-static approximation is outside its comfort zone."""


class ClassificationDegenerateWarning(UserWarning):
    pass
