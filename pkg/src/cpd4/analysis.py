"""Canonical-principal-direction analysis of surfaces in E^4.

A surface is CPD relative to a fixed unit vector ``k`` when the tangential
part of ``k`` is a principal direction of every shape operator. Writing
``k = cos(theta) e1 + sin(theta) e3`` with ``e1`` tangent and ``e3`` normal,
this is ``h^3_12 = h^4_12 = 0`` in the adapted frame. The module also turns
the structure equations that CPD surfaces satisfy into numerical residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ChartError, DegenerateAngleError
from .geometry import (
    FirstFundamentalForm,
    Frame,
    Jet2,
    SecondFundamentalData,
    SurfacePatch,
    chart_defect,
    first_fundamental_form,
    jet,
    second_fundamental,
    tangent_coordinates,
)
from .numerics import Sym2Matrix, gram_schmidt, orthonormal_complement, sym2_eigen

K_DEFAULT = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class CpdContext:
    """Fixed direction and tolerance profile.

    ``eigen_tol`` bounds the off-diagonals (and ``h^4_11``), ``residual_tol``
    the derivative-based residuals, ``theta_tol`` the angle derivatives.
    """

    k: tuple = K_DEFAULT
    eigen_tol: float = 1e-5
    residual_tol: float = 1e-4
    theta_tol: float = 1e-6
    theta_eps: float = 1e-4
    chart_tol: float = 1e-6
    step: float = 1e-5
    max_excluded_fraction: float = 0.2

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.shape != (4,) or abs(np.linalg.norm(k) - 1.0) > 1e-12:
            raise ValueError("k must be a unit vector in R^4")
        for name in ("eigen_tol", "residual_tol", "theta_tol", "theta_eps", "chart_tol", "step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "k", tuple(float(c) for c in k))

    @property
    def kvec(self) -> np.ndarray:
        return np.array(self.k)


@dataclass(frozen=True)
class AdaptedFrame(Frame):
    theta: float = 0.0


def decompose_direction(j: Jet2, ctx: CpdContext) -> AdaptedFrame:
    """Split ``k`` into tangent and normal parts and build the adapted frame.

    ``e2`` is oriented with ``<e2, x_t> > 0``; ``e4`` so that
    ``det[e1, e2, e3, e4] = +1``.
    """
    first_fundamental_form(j)
    k = ctx.kvec
    q1, q2 = gram_schmidt([j.xs, j.xt])
    k_tan = (k @ q1) * q1 + (k @ q2) * q2
    k_nor = k - k_tan
    nt, nn = np.linalg.norm(k_tan), np.linalg.norm(k_nor)
    theta = math.atan2(nn, nt)
    where = (j.s, j.t)
    if theta <= ctx.theta_eps:
        raise DegenerateAngleError(
            f"theta~0 degenerate at {where}: k is tangent to the surface", "theta~0", theta, where
        )
    if theta >= 0.5 * math.pi - ctx.theta_eps:
        raise DegenerateAngleError(
            f"theta~pi/2 degenerate at {where}: k is normal to the surface", "theta~pi/2", theta, where
        )
    e1 = k_tan / nt
    e3 = k_nor / nn
    r = j.xt - (j.xt @ e1) * e1
    if np.linalg.norm(r) > 1e-8 * np.linalg.norm(j.xt):
        e2 = r / np.linalg.norm(r)
    else:
        r = j.xs - (j.xs @ e1) * e1
        e2 = -r / np.linalg.norm(r)
    n1, n2 = orthonormal_complement(e1, e2)
    r1, r2 = n1 - (n1 @ e3) * e3, n2 - (n2 @ e3) * e3
    e4 = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
    e4 = e4 / np.linalg.norm(e4)
    if np.linalg.det(np.column_stack([e1, e2, e3, e4])) < 0:
        e4 = -e4
    return AdaptedFrame(e1, e2, e3, e4, theta)


@dataclass(frozen=True)
class PointSample:
    """Everything the adapted frame tells about one point."""

    s: float
    t: float
    jet: Jet2
    ff: FirstFundamentalForm
    frame: AdaptedFrame
    sfd: SecondFundamentalData

    @property
    def theta(self) -> float:
        return self.frame.theta


def sample_point(surface: SurfacePatch, ctx: CpdContext, s: float, t: float) -> PointSample:
    j = jet(surface, s, t)
    ff = first_fundamental_form(j)
    frame = decompose_direction(j, ctx)
    return PointSample(s, t, j, ff, frame, second_fundamental(j, frame, ff))


@dataclass(frozen=True)
class Stencil:
    """Point sample plus its four coordinate neighbours at distance ``h``."""

    center: PointSample
    s_minus: PointSample
    s_plus: PointSample
    t_minus: PointSample
    t_plus: PointSample
    h: float

    def partials(self, fn) -> tuple:
        """``(d/ds, d/dt)`` of ``fn(PointSample)`` by central differences."""
        h = self.h
        fs = (fn(self.s_plus) - fn(self.s_minus)) / (2 * h)
        ft = (fn(self.t_plus) - fn(self.t_minus)) / (2 * h)
        return fs, ft

    def directional(self, fn, v: np.ndarray):
        """Derivative of ``fn`` along the tangent vector ``v`` at the centre."""
        a, b = tangent_coordinates(self.center.jet, v, self.center.ff)
        fs, ft = self.partials(fn)
        return a * fs + b * ft


def sample_stencil(surface: SurfacePatch, ctx: CpdContext, s: float, t: float,
                   step: Optional[float] = None) -> Stencil:
    h = ctx.step if step is None else step
    return Stencil(
        sample_point(surface, ctx, s, t),
        sample_point(surface, ctx, s - h, t),
        sample_point(surface, ctx, s + h, t),
        sample_point(surface, ctx, s, t - h),
        sample_point(surface, ctx, s, t + h),
        h,
    )


def _theta(p: PointSample) -> float:
    return p.theta


def grid_nodes(domain, n_s: int, n_t: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell-centred nodes of an ``n_s x n_t`` grid (never on the boundary)."""
    s0, s1, t0, t1 = domain
    s = s0 + (np.arange(n_s) + 0.5) * (s1 - s0) / n_s
    t = t0 + (np.arange(n_t) + 0.5) * (t1 - t0) / n_t
    return s, t


def principal_alignment_angle(S: Sym2Matrix, umbilic_tol: float = 1e-9) -> float:
    """Angle between the first frame axis and the nearest eigenvector of ``S``.

    Near-umbilic matrices (eigenvalue gap below ``umbilic_tol``) have every
    direction principal and give 0.
    """
    (l1, v1), (l2, v2) = sym2_eigen(S)
    if abs(l1 - l2) <= umbilic_tol:
        return 0.0
    v = v1 if abs(v1[0]) >= abs(v2[0]) else v2
    return math.atan2(abs(v[1]), abs(v[0]))


@dataclass
class PointRecord:
    s: float
    t: float
    theta: Optional[float] = None
    h: Optional[dict] = None
    e1_theta: Optional[float] = None
    e2_theta: Optional[float] = None
    excluded: Optional[str] = None

    @property
    def offdiag(self) -> float:
        return max(abs(self.h["h3_12"]), abs(self.h["h4_12"]))


@dataclass
class CpdReport:
    n_s: int
    n_t: int
    points: list
    theta: np.ndarray
    max_h3_12: float
    max_h4_12: float
    max_h4_11: float
    max_h3_11_plus_e1_theta: float
    max_e2_theta: float
    max_dtheta_dt: float
    max_dtheta_ds: float
    excluded: int
    checks: dict
    verdict: str
    lemma: Optional[dict] = None
    notes: list = field(default_factory=list)

    @property
    def max_offdiag(self) -> float:
        return max(self.max_h3_12, self.max_h4_12)

    @property
    def is_cpd(self) -> bool:
        return self.verdict == "CPD"


def _nanmax(values) -> float:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0 or np.all(np.isnan(arr)):
        return math.nan
    return float(np.nanmax(np.abs(arr)))


@dataclass
class ThetaField:
    s: np.ndarray
    t: np.ndarray
    theta: np.ndarray
    max_dtheta_dt: float
    max_dtheta_ds: float

    @property
    def excluded(self) -> np.ndarray:
        return np.isnan(self.theta)


def _grid_derivative(values: np.ndarray, nodes: np.ndarray, axis: int) -> np.ndarray:
    if values.shape[axis] < 2:
        return np.zeros_like(values)
    return np.gradient(values, nodes, axis=axis)


def theta_field(surface: SurfacePatch, ctx: CpdContext, grid=(20, 20)) -> ThetaField:
    """Angle function on the grid and the maxima of its grid derivatives.

    Degenerate nodes are NaN and ignored by the maxima.
    """
    n_s, n_t = grid
    s_nodes, t_nodes = grid_nodes(surface.domain, n_s, n_t)
    theta = np.full((n_s, n_t), np.nan)
    for a, s in enumerate(s_nodes):
        for b, t in enumerate(t_nodes):
            try:
                theta[a, b] = decompose_direction(jet(surface, s, t), ctx).theta
            except DegenerateAngleError:
                pass
    return _theta_field_from(s_nodes, t_nodes, theta)


def _theta_field_from(s_nodes, t_nodes, theta) -> ThetaField:
    with np.errstate(invalid="ignore"):
        dt = _grid_derivative(theta, t_nodes, 1)
        ds = _grid_derivative(theta, s_nodes, 0)
    return ThetaField(s_nodes, t_nodes, theta, _nanmax(dt.ravel()), _nanmax(ds.ravel()))


def verify_cpd(surface: SurfacePatch, ctx: CpdContext, grid=(20, 20)) -> CpdReport:
    """Check the CPD predicate on a cell-centred grid over the surface domain.

    The verdict uses the off-diagonals ``h^3_12``, ``h^4_12`` only. The
    consequences ``h^4_11 = 0``, ``h^3_11 = -e1(theta)`` and ``e2(theta) = 0``
    are reported as separate checks.
    """
    n_s, n_t = grid
    s_nodes, t_nodes = grid_nodes(surface.domain, n_s, n_t)
    theta = np.full((n_s, n_t), np.nan)
    points: list[PointRecord] = []
    for a, s in enumerate(s_nodes):
        for b, t in enumerate(t_nodes):
            rec = PointRecord(float(s), float(t))
            try:
                st = sample_stencil(surface, ctx, float(s), float(t))
            except DegenerateAngleError as exc:
                rec.excluded = exc.kind
                points.append(rec)
                continue
            c = st.center
            rec.theta = c.theta
            rec.h = c.sfd.as_dict()
            rec.e1_theta = float(st.directional(_theta, c.frame.e1))
            rec.e2_theta = float(st.directional(_theta, c.frame.e2))
            theta[a, b] = c.theta
            points.append(rec)

    used = [p for p in points if p.excluded is None]
    excluded = len(points) - len(used)
    tf = _theta_field_from(s_nodes, t_nodes, theta)
    max_h3_12 = _nanmax(p.h["h3_12"] for p in used)
    max_h4_12 = _nanmax(p.h["h4_12"] for p in used)
    max_h4_11 = _nanmax(p.h["h4_11"] for p in used)
    max_h11 = _nanmax(p.h["h3_11"] + p.e1_theta for p in used)
    max_e2 = _nanmax(p.e2_theta for p in used)

    checks = {
        "offdiag": bool(max(max_h3_12, max_h4_12) < ctx.eigen_tol),
        "h4_11": bool(max_h4_11 < ctx.eigen_tol),
        "h3_11_plus_e1_theta": bool(max_h11 < ctx.residual_tol),
        "e2_theta": bool(max_e2 < ctx.theta_tol),
    }
    notes = []
    if not used or excluded > ctx.max_excluded_fraction * len(points):
        verdict = "inconclusive"
        notes.append(f"{excluded} of {len(points)} grid points have degenerate theta")
    else:
        verdict = "CPD" if checks["offdiag"] else "not-CPD"
        if excluded:
            notes.append(f"{excluded} degenerate grid points excluded")
    return CpdReport(
        n_s, n_t, points, theta, max_h3_12, max_h4_12, max_h4_11, max_h11, max_e2,
        tf.max_dtheta_dt, tf.max_dtheta_ds, excluded, checks, verdict, notes=notes,
    )


@dataclass(frozen=True)
class LemmaResiduals:
    """Residuals of the structure equations at one point.

    ``r_a``: e1(h^3_22) - tan(theta) h^3_22 (h^3_11 - h^3_22);
    ``r_b``: e1(h^4_22) + tan(theta) h^3_22 h^4_22;
    ``r_theta``: e2(theta); ``r_m``: e1(m) - m tan(theta) h^3_22;
    ``r_conn_11``: <nabla_e1 e1, e2>; ``r_conn_21``: <nabla_e2 e1, e2> - tan(theta) h^3_22.
    """

    s: float
    t: float
    theta: float
    h3_11: float
    h3_22: float
    h4_22: float
    m: float
    r_a: float
    r_b: float
    r_theta: float
    r_m: float
    r_conn_11: float
    r_conn_21: float
    r_h3_11: float

    @property
    def codazzi(self) -> float:
        return max(abs(self.r_a), abs(self.r_b))

    def max_abs(self) -> float:
        return max(abs(v) for v in (self.r_a, self.r_b, self.r_theta, self.r_m, self.r_conn_11, self.r_conn_21))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def check_chart(p: PointSample, tol: float) -> None:
    defect = max(chart_defect(p.ff), float(np.linalg.norm(p.jet.xs - p.frame.e1)))
    if defect > tol:
        raise ChartError(
            f"at ({p.s!r}, {p.t!r}) the coordinates are not a chart with E=1, F=0, e1=d/ds "
            f"(defect {defect:.3g})"
        )


def lemma_residuals(surface: SurfacePatch, ctx: CpdContext, s: float, t: float,
                    step: Optional[float] = None) -> LemmaResiduals:
    """Structure-equation residuals at ``(s, t)`` in the chart ``g = ds^2 + m^2 dt^2``."""
    st = sample_stencil(surface, ctx, s, t, step)
    for p in (st.center, st.s_minus, st.s_plus):
        check_chart(p, ctx.chart_tol)
    c = st.center
    e1, e2 = c.frame.e1, c.frame.e2
    tan = math.tan(c.theta)
    h3_11, h3_22, h4_22 = c.sfd.S3.a11, c.sfd.S3.a22, c.sfd.S4.a22
    m = c.ff.m

    e1_h3_22 = st.directional(lambda p: p.sfd.S3.a22, e1)
    e1_h4_22 = st.directional(lambda p: p.sfd.S4.a22, e1)
    e1_m = st.directional(lambda p: p.ff.m, e1)
    e1_theta = st.directional(_theta, e1)
    e2_theta = st.directional(_theta, e2)
    d_e1_e1 = st.directional(lambda p: p.frame.e1, e1)
    d_e2_e1 = st.directional(lambda p: p.frame.e1, e2)

    return LemmaResiduals(
        s=float(s), t=float(t), theta=c.theta, h3_11=h3_11, h3_22=h3_22, h4_22=h4_22, m=m,
        r_a=float(e1_h3_22 - tan * h3_22 * (h3_11 - h3_22)),
        r_b=float(e1_h4_22 + tan * h3_22 * h4_22),
        r_theta=float(e2_theta),
        r_m=float(e1_m - m * tan * h3_22),
        r_conn_11=float(d_e1_e1 @ e2),
        r_conn_21=float(d_e2_e1 @ e2 - tan * h3_22),
        r_h3_11=float(h3_11 + e1_theta),
    )
