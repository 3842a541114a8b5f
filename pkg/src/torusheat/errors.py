"""Exception types raised across the package."""


class TorusHeatError(ValueError):
    """Base class for domain errors."""


class NonPositiveTime(TorusHeatError):
    pass


class ToleranceTooTight(TorusHeatError):
    """The truncation radius needed for the requested tolerance exceeds the cap.

    Usually a hint to switch to the other kernel representation.
    """


class InvalidWindow(TorusHeatError):
    pass


class InvalidDelta(TorusHeatError):
    pass


class GridMismatch(TorusHeatError):
    pass


class NonPositiveWeight(TorusHeatError):
    pass


class InvalidExponent(TorusHeatError):
    pass


class NotTorusGrid(TorusHeatError):
    pass


class SupportTooCloseToBoundary(TorusHeatError):
    pass


class EmptyBall(TorusHeatError):
    pass


class DivergentIntegral(TorusHeatError):
    pass
