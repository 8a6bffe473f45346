"""Exception hierarchy shared by all modules.

Every numerical failure derives from :class:`RectifyError` so the CLI can map
it to a single exit code and report the class name.
"""


class RectifyError(Exception):
    """Base class for numerical failures."""


class CenterMismatch(RectifyError):
    pass


class DivisionNearZero(RectifyError):
    pass


class DomainError(RectifyError):
    pass


class OrderTooLow(RectifyError):
    pass


class DegenerateGeometry(RectifyError):
    pass


class StepTooLarge(RectifyError):
    pass


class ResidualBelowTolerance(RectifyError):
    """A derivative vector is (numerically) dependent on its predecessors.

    ``index`` is the curvature that vanishes: a dependent ``alpha^(i+1)``
    means ``kappa_i`` is zero at that point.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"curvature kappa_{index} is numerically zero")


class SchemaError(ValueError):
    """Malformed job or curve description."""
