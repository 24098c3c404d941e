"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class SimpCoordError(Exception):
    code = "error"


class SurfaceFormatError(SimpCoordError, ValueError):
    """A surface document is malformed or violates a gluing invariant."""

    code = "invalid_surface"


class FlipError(SimpCoordError, ValueError):
    code = "inadmissible_flip"


class EnumerationCapError(SimpCoordError, RuntimeError):
    code = "enumeration_cap_exceeded"


class OutOfRangeError(SimpCoordError, OverflowError):
    """Raised instead of silently producing inf/nan."""

    code = "out_of_range"


class DomainError(SimpCoordError, ValueError):
    code = "outside_domain"


class NotInPolytopeError(SimpCoordError, ValueError):
    code = "not_in_polytope"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class LinearSolveError(SimpCoordError, ArithmeticError):
    code = "linear_solve_failure"


class MetricFormatError(SimpCoordError, ValueError):
    code = "invalid_metric"
