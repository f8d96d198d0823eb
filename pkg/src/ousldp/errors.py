"""Exception hierarchy shared by every module.

The CLI maps ``OusldpError`` subclasses to exit status 1 and a
machine-readable ``reason`` string.
"""


class OusldpError(Exception):
    """Base class for library errors."""

    reason = "error"


class DomainError(OusldpError, ValueError):
    """An input lies outside the set where the quantity is defined."""

    reason = "domain"


class BoundaryError(DomainError):
    """A tilt parameter sits too close to the edge of its domain."""

    reason = "boundary"


class NoExpansionError(OusldpError):
    """The regime has no sharp asymptotic expansion of the requested kind."""

    reason = "no_expansion"


class NoSeriesError(NoExpansionError):
    """The regime has no saddlepoint series."""

    reason = "no_series"


class OrderError(OusldpError, ValueError):
    """Requested expansion order exceeds what the regime supports."""

    reason = "order"

    def __init__(self, requested: int, max_order: int):
        self.requested = requested
        self.max_order = max_order
        super().__init__(f"order {requested} not available, max order is {max_order}")


class SolverError(OusldpError, RuntimeError):
    """Root finding failed to meet its residual target."""

    reason = "solver"


class QuadratureError(OusldpError, RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""

    reason = "quadrature"
