"""Exception types shared across the package."""


class RegionCarverError(Exception):
    """Base class for all package errors."""


class PolynomialParseError(RegionCarverError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class OnHypersurfaceError(RegionCarverError):
    """A point is too close to one of the arrangement hypersurfaces."""


class AmbiguousSignError(RegionCarverError):
    """A polynomial evaluation is too close to zero to assign a sign."""


class RegenerateQError(RegionCarverError):
    """The random quadric turned out non-generic; retry with a fresh seed."""


class FlowBreakdownError(RegionCarverError):
    """A gradient trajectory approached a hypersurface and was aborted."""


class SolverFailureError(RegionCarverError):
    """Path tracking failed beyond the accepted budget."""


class RootFindingError(RegionCarverError):
    """The univariate root finder did not converge."""
