"""Second-order jets of parametric surfaces in E^4 and their extrinsic and
intrinsic invariants (fundamental forms, shape operators, H, K, normal
curvature via the shape-operator commutator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ChartError, DomainError, FrameError, RegularityError
from .numerics import (
    Sym2Matrix,
    SmoothFunction1D,
    central_diff_2,
    fd_step_1,
    fd_step_2,
    gram_schmidt,
    orthonormal_complement,
)

REGULARITY_THRESHOLD = 1e-10
FRAME_TOL = 1e-8


@dataclass(frozen=True)
class Jet2:
    s: float
    t: float
    x: np.ndarray
    xs: np.ndarray
    xt: np.ndarray
    xss: np.ndarray
    xst: np.ndarray
    xtt: np.ndarray

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in (self.x, self.xs, self.xt, self.xss, self.xst, self.xtt))


@dataclass(frozen=True)
class SurfacePatch:
    """A map ``(s, t) -> R^4`` on ``[s_min, s_max] x [t_min, t_max]``.

    ``jet_rule`` (optional) returns the full analytic :class:`Jet2`; without it
    jets come from central differences.
    """

    map: Callable[[float, float], np.ndarray]
    domain: tuple[float, float, float, float]
    jet_rule: Optional[Callable[[float, float], Jet2]] = None
    label: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __call__(self, s: float, t: float) -> np.ndarray:
        return np.asarray(self.map(s, t), dtype=float)

    def contains(self, s: float, t: float, margin: float = 0.0) -> bool:
        s0, s1, t0, t1 = self.domain
        return s0 + margin <= s <= s1 - margin and t0 + margin <= t <= t1 - margin


def jet(surface: SurfacePatch, s: float, t: float) -> Jet2:
    """Evaluate position and all first and second partials at ``(s, t)``."""
    if surface.jet_rule is not None:
        if not surface.contains(s, t):
            raise DomainError(f"({s!r}, {t!r}) outside surface domain {surface.domain}", (s, t))
        j = surface.jet_rule(s, t)
    else:
        h1s, h1t = fd_step_1(s), fd_step_1(t)
        h2s, h2t = fd_step_2(s), fd_step_2(t)
        s0, s1, t0, t1 = surface.domain
        if not (s0 + 2 * h2s <= s <= s1 - 2 * h2s and t0 + 2 * h2t <= t <= t1 - 2 * h2t):
            raise DomainError(
                f"({s!r}, {t!r}) closer than two finite-difference steps to the boundary of {surface.domain}",
                (s, t),
            )
        x = surface(s, t)
        xs = (surface(s + h1s, t) - surface(s - h1s, t)) / (2 * h1s)
        xt = (surface(s, t + h1t) - surface(s, t - h1t)) / (2 * h1t)
        xss = (surface(s + h2s, t) - 2 * x + surface(s - h2s, t)) / h2s**2
        xtt = (surface(s, t + h2t) - 2 * x + surface(s, t - h2t)) / h2t**2
        xst = (
            surface(s + h2s, t + h2t) - surface(s + h2s, t - h2t)
            - surface(s - h2s, t + h2t) + surface(s - h2s, t - h2t)
        ) / (4 * h2s * h2t)
        j = Jet2(s, t, x, xs, xt, xss, xst, xtt)
    if not j.is_finite():
        raise RegularityError(f"non-finite jet at ({s!r}, {t!r})", (s, t))
    return j


@dataclass(frozen=True)
class FirstFundamentalForm:
    E: float
    F: float
    G: float

    @property
    def det(self) -> float:
        return self.E * self.G - self.F * self.F

    @property
    def m(self) -> float:
        """Length of ``x_t``; the warping function when E=1, F=0."""
        return math.sqrt(self.G)

    def matrix(self) -> np.ndarray:
        return np.array([[self.E, self.F], [self.F, self.G]])


def first_fundamental_form(j: Jet2) -> FirstFundamentalForm:
    ff = FirstFundamentalForm(float(j.xs @ j.xs), float(j.xs @ j.xt), float(j.xt @ j.xt))
    if not (ff.E > 0 and ff.G > 0 and ff.det > REGULARITY_THRESHOLD):
        raise RegularityError(
            f"degenerate metric at ({j.s!r}, {j.t!r}): EG-F^2={ff.det!r}", (j.s, j.t)
        )
    return ff


def normal_basis(j: Jet2) -> tuple[np.ndarray, np.ndarray]:
    first_fundamental_form(j)
    return orthonormal_complement(j.xs, j.xt)


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame: tangent e1, e2 and normal e3, e4."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    e4: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.e1, self.e2, self.e3, self.e4])

    def replace(self, **vectors) -> "Frame":
        data = {k: getattr(self, k) for k in ("e1", "e2", "e3", "e4")}
        data.update(vectors)
        return Frame(**data)


def tangent_frame(j: Jet2) -> Frame:
    """Gram-Schmidt frame of ``(x_s, x_t)`` completed by :func:`normal_basis`."""
    e1, e2 = gram_schmidt([j.xs, j.xt])
    e3, e4 = normal_basis(j)
    return Frame(e1, e2, e3, e4)


@dataclass(frozen=True)
class SecondFundamentalData:
    """Coefficients ``h^beta_ij = <h(e_i, e_j), e_beta>`` for beta = 3, 4.

    In an orthonormal frame the matrix of ``S_beta`` in ``{e1, e2}`` is
    exactly ``[h^beta_ij]``, so ``S3``/``S4`` hold the six scalars.
    """

    frame: Frame
    S3: Sym2Matrix
    S4: Sym2Matrix

    def h(self, beta: int, i: int, k: int) -> float:
        S = {3: self.S3, 4: self.S4}[beta].as_array()
        return float(S[i - 1, k - 1])

    def h_vector(self, i: int, k: int) -> np.ndarray:
        """The normal vector ``h(e_i, e_k)``."""
        return self.h(3, i, k) * self.frame.e3 + self.h(4, i, k) * self.frame.e4

    def as_dict(self) -> dict:
        return {
            "h3_11": self.S3.a11, "h3_12": self.S3.a12, "h3_22": self.S3.a22,
            "h4_11": self.S4.a11, "h4_12": self.S4.a12, "h4_22": self.S4.a22,
        }


def tangent_coordinates(j: Jet2, v: np.ndarray, ff: Optional[FirstFundamentalForm] = None) -> np.ndarray:
    """Coefficients ``(a, b)`` with ``v = a x_s + b x_t`` (least squares)."""
    if ff is None:
        ff = first_fundamental_form(j)
    rhs = np.array([v @ j.xs, v @ j.xt])
    return np.linalg.solve(ff.matrix(), rhs)


def second_derivative(j: Jet2, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Bilinear second-derivative form ``D^2 x(u, w)`` for coordinate vectors ``u, w``."""
    return u[0] * w[0] * j.xss + (u[0] * w[1] + u[1] * w[0]) * j.xst + u[1] * w[1] * j.xtt


def second_fundamental(j: Jet2, frame: Frame, ff: Optional[FirstFundamentalForm] = None) -> SecondFundamentalData:
    if ff is None:
        ff = first_fundamental_form(j)
    Q = frame.matrix()
    if np.max(np.abs(Q.T @ Q - np.eye(4))) > FRAME_TOL:
        raise FrameError("frame is not orthonormal")
    coords = []
    for e in (frame.e1, frame.e2):
        c = tangent_coordinates(j, e, ff)
        if np.linalg.norm(c[0] * j.xs + c[1] * j.xt - e) > FRAME_TOL:
            raise FrameError("e1, e2 do not lie in the tangent plane")
        coords.append(c)
    d11 = second_derivative(j, coords[0], coords[0])
    d12 = second_derivative(j, coords[0], coords[1])
    d22 = second_derivative(j, coords[1], coords[1])
    S3 = Sym2Matrix(float(d11 @ frame.e3), float(d12 @ frame.e3), float(d22 @ frame.e3))
    S4 = Sym2Matrix(float(d11 @ frame.e4), float(d12 @ frame.e4), float(d22 @ frame.e4))
    return SecondFundamentalData(frame, S3, S4)


def mean_curvature(sfd: SecondFundamentalData) -> np.ndarray:
    return 0.5 * (sfd.S3.trace * sfd.frame.e3 + sfd.S4.trace * sfd.frame.e4)


def gauss_curvature_extrinsic(sfd: SecondFundamentalData) -> float:
    """K from the Gauss equation: sum over normals of det S_beta."""
    return sfd.S3.det + sfd.S4.det


def normal_commutator(sfd: SecondFundamentalData) -> float:
    """Frobenius norm of ``[S3, S4]``; zero iff the normal bundle is flat."""
    A, B = sfd.S3.as_array(), sfd.S4.as_array()
    return float(np.linalg.norm(A @ B - B @ A))


def chart_defect(ff: FirstFundamentalForm) -> float:
    return max(abs(ff.E - 1.0), abs(ff.F))


def gauss_curvature_intrinsic(surface: SurfacePatch, s: float, t: float,
                              step: Optional[float] = None, chart_tol: float = 1e-6) -> float:
    """K = -m_ss / m with m = sqrt(G), valid in a chart with E = 1, F = 0."""
    h = fd_step_2(s) if step is None else step
    for ss in (s - h, s, s + h):
        ff = first_fundamental_form(jet(surface, ss, t))
        if chart_defect(ff) > chart_tol:
            raise ChartError(
                f"metric at ({ss!r}, {t!r}) is not of the form ds^2 + m^2 dt^2 "
                f"(E-1={ff.E - 1:.3g}, F={ff.F:.3g})"
            )
    s_min, s_max = surface.domain[:2]
    m = SmoothFunction1D(lambda ss: first_fundamental_form(jet(surface, ss, t)).m, domain=(s_min, s_max))
    return -central_diff_2(m, s, h) / m(s)


def christoffel_from_jet(j: Jet2, ff: Optional[FirstFundamentalForm] = None) -> np.ndarray:
    """Gamma[k, a, b] from the tangential part of the second partials."""
    if ff is None:
        ff = first_fundamental_form(j)
    ginv = np.linalg.inv(ff.matrix())
    second = {(0, 0): j.xss, (0, 1): j.xst, (1, 0): j.xst, (1, 1): j.xtt}
    gamma = np.empty((2, 2, 2))
    for (a, b), xab in second.items():
        lowered = np.array([xab @ j.xs, xab @ j.xt])
        gamma[:, a, b] = ginv @ lowered
    return gamma


def christoffel_from_metric(surface: SurfacePatch, s: float, t: float, step: float = 1e-5) -> np.ndarray:
    """Gamma[k, a, b] from finite differences of E, F, G only."""

    def g(ss, tt):
        return first_fundamental_form(jet(surface, ss, tt)).matrix()

    dg = np.empty((2, 2, 2))  # dg[c, a, b] = d_c g_ab
    dg[0] = (g(s + step, t) - g(s - step, t)) / (2 * step)
    dg[1] = (g(s, t + step) - g(s, t - step)) / (2 * step)
    lowered = np.empty((2, 2, 2))  # lowered[l, a, b] = Gamma_{l,ab}
    for l in range(2):
        for a in range(2):
            for b in range(2):
                lowered[l, a, b] = 0.5 * (dg[a, b, l] + dg[b, a, l] - dg[l, a, b])
    ginv = np.linalg.inv(g(s, t))
    return np.einsum("kl,lab->kab", ginv, lowered)


@dataclass(frozen=True)
class InvariantReport:
    s: float
    t: float
    H: np.ndarray
    K: float
    K_intrinsic: Optional[float]
    commutator_norm: float
    chart_ok: bool


def surface_invariants(surface: SurfacePatch, s: float, t: float, frame: Optional[Frame] = None,
                       chart_tol: float = 1e-6) -> InvariantReport:
    """H, K (extrinsic and, where the chart allows, intrinsic) and ``|[S3, S4]|`` at a point."""
    j = jet(surface, s, t)
    ff = first_fundamental_form(j)
    if frame is None:
        frame = tangent_frame(j)
    sfd = second_fundamental(j, frame, ff)
    try:
        k_int = gauss_curvature_intrinsic(surface, s, t, chart_tol=chart_tol)
        chart_ok = True
    except ChartError:
        k_int, chart_ok = None, False
    return InvariantReport(s, t, mean_curvature(sfd), gauss_curvature_extrinsic(sfd), k_int,
                           normal_commutator(sfd), chart_ok)
