"""Exception hierarchy shared by all cpd4 modules."""

from __future__ import annotations


class Cpd4Error(Exception):
    """Base class for every error raised by cpd4."""


class DomainError(Cpd4Error, ValueError):
    """An evaluation point (or a finite-difference stencil) left the domain."""

    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = x


class QuadratureError(Cpd4Error, ArithmeticError):
    """Adaptive quadrature hit its refinement limit before reaching the tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class RegularityError(Cpd4Error, ValueError):
    """A curve or surface is not regular at some location."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class DegenerateTangentError(RegularityError):
    """Two vectors expected to span a plane are (numerically) dependent."""


class FrameError(Cpd4Error, ValueError):
    """A frame handed to a geometric routine is not orthonormal or not adapted."""


class DegenerateAngleError(Cpd4Error, ValueError):
    """The fixed direction is (almost) tangent or (almost) normal to the surface.

    ``kind`` is ``"theta~0"`` (k tangent) or ``"theta~pi/2"`` (k normal).
    """

    def __init__(self, message: str, kind: str, theta: float, location=None):
        super().__init__(message)
        self.kind = kind
        self.theta = theta
        self.location = location


class ChartError(Cpd4Error, ValueError):
    """The coordinates are not the chart with E=1, F=0 and e1=d/ds."""


class RecipeError(Cpd4Error, ValueError):
    """A generator recipe violates one of its invariants."""


class ConfigError(Cpd4Error, ValueError):
    """A run configuration is malformed; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
