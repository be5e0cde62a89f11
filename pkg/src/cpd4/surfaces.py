"""Bundled surfaces used as controls: a generic graph (not CPD), the plane
containing k (theta degenerate) and a tilted plane (trivially CPD).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Jet2, SurfacePatch

ZERO = np.zeros(4)


def generic_graph_surface(domain=(0.2, 1.0, 0.2, 1.0)) -> SurfacePatch:
    """x(s, t) = (s, t, s t^2 + s^3, s t)."""

    def rule(s, t):
        return Jet2(
            s, t,
            np.array([s, t, s * t * t + s**3, s * t]),
            np.array([1.0, 0.0, t * t + 3 * s * s, t]),
            np.array([0.0, 1.0, 2 * s * t, s]),
            np.array([0.0, 0.0, 6 * s, 0.0]),
            np.array([0.0, 0.0, 2 * t, 1.0]),
            np.array([0.0, 0.0, 2 * s, 0.0]),
        )

    return SurfacePatch(lambda s, t: rule(s, t).x, tuple(domain), rule, "generic-graph")


def coordinate_plane(domain=(-1.0, 1.0, -1.0, 1.0)) -> SurfacePatch:
    """x(s, t) = (s, t, 0, 0); k = (1, 0, 0, 0) is tangent everywhere."""
    e1, e2 = np.eye(4)[0], np.eye(4)[1]

    def rule(s, t):
        return Jet2(s, t, s * e1 + t * e2, e1, e2, ZERO, ZERO, ZERO)

    return SurfacePatch(lambda s, t: rule(s, t).x, tuple(domain), rule, "theta-degenerate-plane")


def tilted_plane(alpha: float = 0.6, domain=(-1.0, 1.0, -1.0, 1.0)) -> SurfacePatch:
    """x(s, t) = (s cos(alpha), t, s sin(alpha), 0): theta = alpha everywhere."""
    u = np.array([math.cos(alpha), 0.0, math.sin(alpha), 0.0])
    v = np.array([0.0, 1.0, 0.0, 0.0])

    def rule(s, t):
        return Jet2(s, t, s * u + t * v, u, v, ZERO, ZERO, ZERO)

    return SurfacePatch(lambda s, t: rule(s, t).x, tuple(domain), rule, f"tilted-plane({alpha:g})")


BUILTIN = {
    "generic-graph": generic_graph_surface,
    "theta-degenerate-plane": coordinate_plane,
    "tilted-plane": tilted_plane,
}
