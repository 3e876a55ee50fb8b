"""Exception hierarchy shared by all dlgaplab modules."""


class DLGapLabError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(DLGapLabError, ValueError):
    pass


class SupportOutOfRange(DLGapLabError, ValueError):
    pass


class DenseTooLarge(DLGapLabError, ValueError):
    pass


class NotHermitian(DLGapLabError, ValueError):
    pass


class NotPSD(DLGapLabError, ValueError):
    pass


class NotProjector(DLGapLabError, ValueError):
    pass


class ZeroState(DLGapLabError, ValueError):
    pass


class NoConvergence(DLGapLabError, RuntimeError):
    pass


class GaplessWithinTolerance(DLGapLabError, RuntimeError):
    pass


class InvalidOrdering(DLGapLabError, ValueError):
    pass


class OddScale(DLGapLabError, ValueError):
    pass


class Misaligned(DLGapLabError, ValueError):
    pass


class NotNearestNeighbor(DLGapLabError, ValueError):
    pass


class GroundSpaceMismatch(DLGapLabError, RuntimeError):
    pass


class QTooLarge(DLGapLabError, ValueError):
    pass


class EpsTooLarge(DLGapLabError, ValueError):
    pass


class DegenerateDenominator(DLGapLabError, ZeroDivisionError):
    pass
