"""Exception hierarchy shared by every module of the package."""


class SliceError(Exception):
    """Base class; the CLI maps every subclass to a nonzero exit code."""

    exit_code = 3


class AlgebraMismatch(SliceError):
    pass


class ModeMismatch(SliceError):
    pass


class ZeroNotInvertible(SliceError, ZeroDivisionError):
    pass


class NotImaginaryUnit(SliceError, ValueError):
    pass


class OutOfDomain(SliceError, ValueError):
    pass


class PoleProximity(SliceError):
    pass


class RealPointDerivative(SliceError):
    pass


class EmptyDomainIntersection(SliceError):
    pass


class GridTooSmall(SliceError, ValueError):
    pass


class OutOfAnnulus(SliceError, ValueError):
    pass


class CaseMismatch(SliceError):
    pass


class PhiUndefined(SliceError, ZeroDivisionError):
    pass


class NormalIdenticallyZero(SliceError):
    pass


class SphericalDerivativeVanishes(SliceError):
    pass


class DegenerateEpsilon(SliceError):
    pass


class ContourThroughSingularity(SliceError):
    pass


class NonConvergentWindow(SliceError):
    pass


class ProbeInconclusive(SliceError):
    exit_code = 4


class ParseError(SliceError, ValueError):
    exit_code = 2

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class AmbiguousConstantProduct(ParseError):
    pass
