"""Exception types shared across the package."""


class GyroError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(GyroError):
    """Operands have incompatible shapes for the requested operation."""


class NumericalError(GyroError):
    """A computation left its valid numerical domain (NaN, overflow, ...)."""


class DegenerateMidpoint(NumericalError):
    """Weighted-midpoint denominator too close to zero to be meaningful.

    Carries the offending denominator value as ``denominator``.
    """

    def __init__(self, denominator: float, message: str | None = None):
        self.denominator = float(denominator)
        if message is None:
            message = (
                "weighted midpoint denominator %.6g is within the degeneracy "
                "guard; the midpoint is not defined here" % self.denominator
            )
        super().__init__(message)
