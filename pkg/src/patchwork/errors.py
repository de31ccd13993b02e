"""Exception types shared across the package."""


class PatchworkError(Exception):
    """Base class for all package errors."""


class InstanceError(PatchworkError):
    """Malformed or inconsistent problem instance."""


class PrimitivityError(PatchworkError):
    """Triangulation fails a primitivity or tiling check."""


class FanError(PatchworkError):
    """Compactification fan is not a subfan of the dual fan."""


class PhaseError(PatchworkError):
    """Invalid real phase structure."""


class NonCompactError(PatchworkError):
    """Operation requires a compact (complete-fan) complex."""


class CurveError(PatchworkError):
    """Curve-specific precondition failed (wrong dimension, inadmissible twists, ...)."""
