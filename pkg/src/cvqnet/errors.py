"""Exception types raised across the package."""


class QnetError(ValueError):
    """Base class for invalid inputs to cvqnet routines."""


class InvalidDimensionError(QnetError):
    pass


class DimensionMismatchError(QnetError):
    pass


class DegenerateInputError(QnetError):
    """Raised when Gram-Schmidt meets a (numerically) linearly dependent column."""


class NonUnitaryError(QnetError):
    pass


class NonPhysicalCovarianceError(QnetError):
    """Covariance matrix is not positive definite."""
