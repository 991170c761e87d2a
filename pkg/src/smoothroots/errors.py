"""Exception types shared by the package."""


class SmoothRootsError(Exception):
    """Base class for all errors raised by smoothroots."""


class NotCentered(SmoothRootsError, ValueError):
    pass


class NotHyperbolic(SmoothRootsError, ValueError):
    """A polynomial (or a grid column of a curve) has non-real roots."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ZeroScale(SmoothRootsError, ValueError):
    pass


class InsufficientWindow(SmoothRootsError, ValueError):
    pass


class NonUniformGrid(SmoothRootsError, ValueError):
    pass


class LemmaViolation(SmoothRootsError):
    """a_2 vanishes to second order but some a_k does not vanish to order k."""


class OrderTooLow(SmoothRootsError, ValueError):
    pass


class ClustersCollide(SmoothRootsError):
    pass


class NoConvergence(SmoothRootsError):
    pass


class TrackingError(SmoothRootsError):
    """Raised by the trackers when no consistent labeling can be produced."""


class GluingAmbiguous(UserWarning):
    """Two junction permutations tie at every matching level.

    Non-fatal: the tracker falls back to local order-2 assignment.
    """
