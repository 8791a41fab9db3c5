"""Exception hierarchy. Every error raised by the toolkit derives from LipcapError."""


class LipcapError(ValueError):
    pass


class DepthTooLarge(LipcapError):
    pass


class ShapeOutsideRoot(LipcapError):
    pass


class ObstaclesOverlap(LipcapError):
    pass


class BetaOutOfRange(LipcapError):
    pass


class GaugeInvalid(LipcapError):
    pass


class EmptySet(LipcapError):
    pass


class NonpositiveT(LipcapError):
    pass


class GridInvalid(LipcapError):
    pass


class UnsupportedSmoothness(LipcapError):
    pass


class TooCloseToSupport(LipcapError):
    def __init__(self, message, nearest=None, distance=None):
        super().__init__(message)
        self.nearest = nearest
        self.distance = distance


class ChiMismatchOnSupport(LipcapError):
    pass


class BInSupport(LipcapError):
    pass


class PhiDomainMismatch(LipcapError):
    pass


class GridTooCoarse(LipcapError):
    pass


class NotACover(LipcapError):
    pass


class SquareTooLarge(LipcapError):
    pass


class DepthInsufficient(LipcapError):
    pass


class NotDivergent(LipcapError):
    pass
