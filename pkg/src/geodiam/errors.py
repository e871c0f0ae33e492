"""Exception types shared across the package."""


class GeodiamError(Exception):
    """Base class for all package errors."""


class DegenerateChain(GeodiamError):
    """Chain has fewer than 3 vertices, repeated consecutive vertices, or zero area."""


class SelfIntersectingChain(GeodiamError):
    """Chain is not simple."""


class HoleOutsideOuter(GeodiamError):
    """A hole is not strictly inside the outer chain."""


class HolesOverlap(GeodiamError):
    """Two hole closures intersect."""


class PointOutsideDomain(GeodiamError):
    """Query point lies outside the domain."""


class DisconnectedDomain(GeodiamError):
    """Some corner is unreachable from another."""


class PathExplosion(GeodiamError):
    """Shortest-path enumeration exceeded the configured cap."""


class UnknownFixture(GeodiamError):
    """Fixture name not recognized."""


class InfeasibleParams(GeodiamError):
    """Fixture parameters cannot be realized."""


class DegenerateConfiguration(GeodiamError):
    """Corner/weight configuration has a non-isolated solution set."""


class BudgetExceeded(GeodiamError):
    """Tuple enumeration budget exhausted; partial results available."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class GridDisconnected(GeodiamError):
    """Grid oracle graph does not connect the query points."""


class InvalidEps(GeodiamError):
    """Approximation parameter out of range."""
