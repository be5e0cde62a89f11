"""Generators for the four families of CPD surfaces relative to k = (1, 0, 0, 0).

Non-constant angle (theta = theta(s)):

* ``NC-1``: x = (A(s), B(s) phi(t)) + gamma(t),  gamma' = Psi phi'
* ``NC-2``: x = (A(s), B(s) w) + rho phi(t)

Constant angle theta0:

* ``C-1``: x = s (cos theta0, sin theta0 phi(t)) + gamma(t),  gamma' = sin theta0 Psi phi'
* ``C-2``: x = s (cos theta0, sin theta0 w) + rho phi(t)

with A = int_{s0}^s cos theta, B = int_{s0}^s sin theta, phi a unit-speed
curve on the unit sphere of the x2x3x4-space and, for the Case-2 families, w a
constant unit vector orthogonal to k and to the plane of the great circle phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import RecipeError
from .geometry import Jet2, SurfacePatch
from .numerics import Curve4, SmoothFunction1D, arc_length_reparametrize, integrate

FAMILIES = ("NC-1", "NC-2", "C-1", "C-2")
K = np.array([1.0, 0.0, 0.0, 0.0])
THETA_EPS = 1e-4
TABLE_SPACING = 2e-3


def _embed(v3) -> np.ndarray:
    return np.array([0.0, v3[0], v3[1], v3[2]])


class SphereCurve:
    """Curve on the unit sphere of the hyperplane x1 = 0."""

    def __init__(self, curve: Curve4, unit_speed: bool, name: str = "", samples: int = 65):
        self.curve = curve
        self.unit_speed = unit_speed
        self.name = name
        a, b = curve.domain
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise RecipeError(f"sphere curve {name!r}: needs a finite domain")
        for t in np.linspace(a, b, samples):
            p = curve(t)
            if abs(p[0]) > 1e-12:
                raise RecipeError(f"sphere curve {name!r}: first component must vanish (t={t!r})")
            if abs(np.linalg.norm(p) - 1.0) > 1e-8:
                raise RecipeError(f"sphere curve {name!r}: |phi| != 1 at t={t!r}")
            if unit_speed and abs(curve.speed(t) - 1.0) > 1e-6:
                raise RecipeError(f"sphere curve {name!r}: flagged unit-speed but |phi'|={curve.speed(t)!r}")

    @property
    def domain(self) -> tuple[float, float]:
        return self.curve.domain

    def __call__(self, t: float) -> np.ndarray:
        return self.curve(t)

    def velocity(self, t: float) -> np.ndarray:
        return self.curve.velocity(t)

    def acceleration(self, t: float) -> np.ndarray:
        return self.curve.acceleration(t)

    def geodesic_curvature(self, t: float) -> float:
        """Signed geodesic curvature det(phi, phi', phi'') / |phi'|^3."""
        p, v, a = self(t)[1:], self.velocity(t)[1:], self.acceleration(t)[1:]
        return float(np.linalg.det(np.array([p, v, a])) / np.linalg.norm(v) ** 3)

    def pole(self, t: float) -> np.ndarray:
        """Unit vector ``phi x phi'`` (in x2x3x4) orthogonal to the osculating great circle."""
        c = np.cross(self(t)[1:], self.velocity(t)[1:])
        return _embed(c / np.linalg.norm(c))

    def __repr__(self):
        return f"SphereCurve({self.name!r}, domain={self.domain})"


def great_circle(a=(0.0, 1.0, 0.0, 0.0), b=(0.0, 0.0, 1.0, 0.0), length: float = 2 * math.pi,
                 name: str = "great-circle") -> SphereCurve:
    """``phi(t) = cos t a + sin t b`` for orthonormal ``a, b`` with first component 0."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if abs(a @ b) > 1e-12 or abs(a @ a - 1) > 1e-12 or abs(b @ b - 1) > 1e-12:
        raise RecipeError("great circle needs an orthonormal pair")
    curve = Curve4(
        lambda t: math.cos(t) * a + math.sin(t) * b,
        lambda t: -math.sin(t) * a + math.cos(t) * b,
        lambda t: -math.cos(t) * a - math.sin(t) * b,
        (0.0, length),
    )
    return SphereCurve(curve, True, name)


def tilted_great_circle(tilt: float, twist: float = 0.0) -> SphereCurve:
    """Great circle through a rotated pair: the plane is tilted by ``tilt`` about x2."""
    a = np.array([0.0, math.cos(twist), math.sin(twist), 0.0])
    b = np.array([0.0, -math.sin(twist) * math.cos(tilt), math.cos(twist) * math.cos(tilt), math.sin(tilt)])
    return great_circle(a, b, name=f"great-circle(tilt={tilt:g},twist={twist:g})")


def latitude_circle(z0: float) -> SphereCurve:
    """Circle at height ``z0`` on x4, already parametrized by arc length.

    Its geodesic curvature is ``z0 / sqrt(1 - z0^2)``; ``z0 = 1/sqrt(2)`` gives 1.
    """
    if not -1.0 < z0 < 1.0:
        raise RecipeError("latitude height must lie in (-1, 1)")
    r = math.sqrt(1.0 - z0 * z0)
    curve = Curve4(
        lambda t: np.array([0.0, r * math.cos(t / r), r * math.sin(t / r), z0]),
        lambda t: np.array([0.0, -math.sin(t / r), math.cos(t / r), 0.0]),
        lambda t: np.array([0.0, -math.cos(t / r) / r, -math.sin(t / r) / r, 0.0]),
        (0.0, 2 * math.pi * r),
    )
    return SphereCurve(curve, True, f"latitude(z0={z0:g})")


def latitude_circle_constant_speed(z0: float) -> Curve4:
    """The same latitude circle with the azimuth as parameter (speed ``sqrt(1 - z0^2)``)."""
    r = math.sqrt(1.0 - z0 * z0)
    return Curve4(
        lambda t: np.array([0.0, r * math.cos(t), r * math.sin(t), z0]),
        lambda t: np.array([0.0, -r * math.sin(t), r * math.cos(t), 0.0]),
        lambda t: np.array([0.0, -r * math.cos(t), -r * math.sin(t), 0.0]),
        (0.0, 2 * math.pi),
    )


def spiral_curve(rate: float = 0.3, polar0: float = 0.6, turns: float = 1.0) -> Curve4:
    """Spherical spiral: polar angle ``polar0 + rate*tau`` at azimuth ``tau`` (not unit speed)."""
    end = 2 * math.pi * turns
    if not (0.0 < polar0 and polar0 + rate * end < math.pi):
        raise RecipeError("spiral polar angle must stay inside (0, pi)")

    def value(tau):
        p = polar0 + rate * tau
        return np.array([0.0, math.sin(p) * math.cos(tau), math.sin(p) * math.sin(tau), math.cos(p)])

    def velocity(tau):
        p = polar0 + rate * tau
        sp, cp, st, ct = math.sin(p), math.cos(p), math.sin(tau), math.cos(tau)
        return np.array([0.0, rate * cp * ct - sp * st, rate * cp * st + sp * ct, -rate * sp])

    def acceleration(tau):
        p = polar0 + rate * tau
        sp, cp, st, ct = math.sin(p), math.cos(p), math.sin(tau), math.cos(tau)
        a2 = rate * rate
        return np.array([
            0.0,
            -a2 * sp * ct - 2 * rate * cp * st - sp * ct,
            -a2 * sp * st + 2 * rate * cp * ct - sp * st,
            -a2 * cp,
        ])

    return Curve4(value, velocity, acceleration, (0.0, end))


def spherical_spiral(rate: float = 0.3, polar0: float = 0.6, turns: float = 1.0) -> SphereCurve:
    """The spherical spiral reparametrized by arc length."""
    return SphereCurve(arc_length_reparametrize(spiral_curve(rate, polar0, turns)), True,
                       f"spiral(rate={rate:g},polar0={polar0:g})")


def sample_sphere_curves() -> dict[str, SphereCurve]:
    return {
        "great-circle": great_circle(),
        "great-circle-tilted": tilted_great_circle(0.7, 0.3),
        "great-circle-x2x4": great_circle((0.0, 1.0, 0.0, 0.0), (0.0, 0.0, 0.0, 1.0), name="great-circle-x2x4"),
        "latitude": latitude_circle(1.0 / math.sqrt(2.0)),
        "latitude-low": latitude_circle(-0.4),
        "spiral": spherical_spiral(),
    }


ThetaSpec = Union[SmoothFunction1D, float]


@dataclass
class GeneratorRecipe:
    """Inputs selecting one member of one of the four families.

    ``domain`` is ``(s_min, s_max, t_min, t_max)``; by default ``s`` runs over
    ``[s0 + 0.05, s0 + 1.2]`` and ``t`` over the domain of ``phi``.
    ``direction`` is the constant vector w of the Case-2 families (default:
    the pole of the great circle ``phi``).
    """

    family: str
    theta: ThetaSpec
    phi: SphereCurve
    psi: Optional[SmoothFunction1D] = None
    s0: float = 0.0
    t0: Optional[float] = None
    domain: Optional[tuple] = None
    rho: float = 1.0
    direction: Optional[tuple] = None
    quad_tol: float = 1e-10
    theta_eps: float = THETA_EPS
    label: str = ""

    def __post_init__(self):
        if self.t0 is None:
            self.t0 = float(self.phi.domain[0])
        if self.domain is None:
            a, b = self.phi.domain
            self.domain = (self.s0 + 0.05, self.s0 + 1.2, float(a), float(b))
        self.domain = tuple(float(v) for v in self.domain)
        if self.direction is None and self.family in ("NC-2", "C-2"):
            self.direction = tuple(self.phi.pole(self.t0))

    @property
    def constant_angle(self) -> bool:
        return self.family.startswith("C-")

    @property
    def case(self) -> int:
        return int(self.family[-1])

    def theta_at(self, s: float) -> float:
        return float(self.theta) if self.constant_angle else self.theta(s)

    def theta_prime_at(self, s: float) -> float:
        return 0.0 if self.constant_angle else self.theta.derivative(s)

    def with_(self, **changes) -> "GeneratorRecipe":
        return replace(self, **changes)


def _fail(msg: str):
    raise RecipeError(msg)


def validate_recipe(r: GeneratorRecipe) -> None:
    """Raise RecipeError naming the first violated invariant."""
    if r.family not in FAMILIES:
        _fail(f"family must be one of {FAMILIES}, got {r.family!r}")
    s_min, s_max, t_min, t_max = r.domain
    if not (s_min < s_max and t_min < t_max):
        _fail(f"domain {r.domain} is empty")
    if not isinstance(r.phi, SphereCurve):
        _fail("phi must be a SphereCurve")
    if not r.phi.unit_speed:
        _fail("phi must be unit-speed; reparametrize it by arc length first")
    a, b = r.phi.domain
    if t_min < a or t_max > b or not (a <= r.t0 <= b):
        _fail(f"t-range [{t_min}, {t_max}] and t0={r.t0} must lie in the phi domain [{a}, {b}]")
    lo_band, hi_band = r.theta_eps, 0.5 * math.pi - r.theta_eps

    if r.constant_angle:
        if isinstance(r.theta, SmoothFunction1D):
            _fail("constant-angle families take a number theta0, not a profile")
        th = float(r.theta)
        if not lo_band < th < hi_band:
            _fail(f"theta0={th!r} outside the admissible band ({lo_band:g}, {hi_band:g})")
    else:
        if not isinstance(r.theta, SmoothFunction1D):
            _fail("non-constant families take a theta profile (SmoothFunction1D)")
        samples = np.linspace(s_min, s_max, 401)
        thetas = np.array([r.theta(s) for s in samples])
        if not np.all(np.isfinite(thetas)):
            _fail("theta is not finite on the s-range")
        bad = np.where((thetas <= lo_band) | (thetas >= hi_band))[0]
        if bad.size:
            _fail(f"theta leaves the admissible band ({lo_band:g}, {hi_band:g}) at s={float(samples[bad[0]]):.6g}")
        if max(abs(r.theta.derivative(s)) for s in samples[1:-1]) < 1e-8:
            _fail("theta' vanishes on the whole s-range; use a constant-angle family")

    if r.case == 1:
        if r.psi is None:
            _fail("Case-1 families need a Psi profile")
    else:
        if not r.rho > 0:
            _fail(f"rho must be positive, got {r.rho!r}")
        w = np.asarray(r.direction, float)
        if w.shape != (4,) or abs(np.linalg.norm(w) - 1) > 1e-10 or abs(w[0]) > 1e-12:
            _fail("direction w must be a unit vector orthogonal to k")
        off = max(abs(r.phi(t) @ w) for t in np.linspace(t_min, t_max, 65))
        if off > 1e-8:
            _fail(f"phi must lie on the great circle orthogonal to w (max |<phi, w>| = {off:.3g})")


def _primitive_table(integrand, lo: float, hi: float, anchor: float, tol: float,
                     spacing: float = TABLE_SPACING) -> CubicHermiteSpline:
    """Hermite table of ``F(x) = int_anchor^x integrand`` on ``[lo, hi]`` (vector-valued).

    Node values come from adaptive quadrature, node slopes are the integrand
    itself, so the interpolation error is O(spacing^4).
    """
    lo, hi = min(lo, anchor), max(hi, anchor)
    memo: dict = {}

    def vec(x):
        if x not in memo:
            memo[x] = np.atleast_1d(np.asarray(integrand(x), dtype=float))
        return memo[x]

    n = max(16, int(math.ceil((hi - lo) / spacing)))
    nodes = np.union1d(np.linspace(lo, hi, n + 1), [anchor])
    slopes = np.array([vec(x) for x in nodes])
    dim = slopes.shape[1]
    seg_tol = tol / len(nodes)
    values = np.zeros_like(slopes)
    for i in range(1, len(nodes)):
        a, b = nodes[i - 1], nodes[i]
        values[i] = values[i - 1] + [
            integrate(lambda x, c=c: float(vec(x)[c]), a, b, seg_tol) for c in range(dim)
        ]
    values -= values[int(np.searchsorted(nodes, anchor))]
    return CubicHermiteSpline(nodes, values, slopes)


def _gamma_scale(r: GeneratorRecipe) -> float:
    return math.sin(float(r.theta)) if r.constant_angle else 1.0


def gamma_curve(recipe: GeneratorRecipe) -> Curve4:
    """gamma(t) = scale * int_{t0}^t Psi phi', scale = sin(theta0) for C-1, 1 for NC-1."""
    if recipe.case != 1 or recipe.psi is None:
        raise RecipeError("gamma is only defined for Case-1 families with a Psi profile")
    psi, phi = recipe.psi, recipe.phi
    c = _gamma_scale(recipe)
    _, _, t_min, t_max = recipe.domain
    table = _primitive_table(lambda t: c * psi(t) * phi.velocity(t)[1:], t_min, t_max, recipe.t0, recipe.quad_tol)
    lo, hi = table.x[0], table.x[-1]
    return Curve4(
        lambda t: _embed(table(t)),
        lambda t: c * psi(t) * phi.velocity(t),
        lambda t: c * (psi.derivative(t) * phi.velocity(t) + psi(t) * phi.acceleration(t)),
        (float(lo), float(hi)),
    )


def _theta_table(r: GeneratorRecipe) -> CubicHermiteSpline:
    s_min, s_max = r.domain[:2]
    return _primitive_table(lambda s: np.array([math.cos(r.theta(s)), math.sin(r.theta(s))]),
                            s_min, s_max, r.s0, r.quad_tol)


def _jet_nc1(r, AB, gamma):
    theta, psi, phi = r.theta, r.psi, r.phi

    def rule(s, t):
        th, dth = theta(s), theta.derivative(s)
        A, B = AB(s)
        c, sn = math.cos(th), math.sin(th)
        P, P1, P2 = phi(t), phi.velocity(t), phi.acceleration(t)
        ps = psi(t)
        m = B + ps
        return Jet2(
            s, t,
            A * K + B * P + gamma(t),
            c * K + sn * P,
            m * P1,
            dth * (-sn * K + c * P),
            sn * P1,
            m * P2 + psi.derivative(t) * P1,
        )

    return rule


def _jet_nc2(r, AB, w):
    theta, phi, rho = r.theta, r.phi, r.rho
    zero = np.zeros(4)

    def rule(s, t):
        th, dth = theta(s), theta.derivative(s)
        A, B = AB(s)
        c, sn = math.cos(th), math.sin(th)
        return Jet2(
            s, t,
            A * K + B * w + rho * phi(t),
            c * K + sn * w,
            rho * phi.velocity(t),
            dth * (-sn * K + c * w),
            zero,
            rho * phi.acceleration(t),
        )

    return rule


def _jet_c1(r, gamma):
    th = float(r.theta)
    c, sn = math.cos(th), math.sin(th)
    psi, phi = r.psi, r.phi
    zero = np.zeros(4)

    def rule(s, t):
        P, P1, P2 = phi(t), phi.velocity(t), phi.acceleration(t)
        ps = psi(t)
        return Jet2(
            s, t,
            s * (c * K + sn * P) + gamma(t),
            c * K + sn * P,
            sn * (s + ps) * P1,
            zero,
            sn * P1,
            sn * (s + ps) * P2 + sn * psi.derivative(t) * P1,
        )

    return rule


def _jet_c2(r, w):
    th = float(r.theta)
    u = math.cos(th) * K + math.sin(th) * w
    phi, rho = r.phi, r.rho
    zero = np.zeros(4)

    def rule(s, t):
        return Jet2(s, t, s * u + rho * phi(t), u, rho * phi.velocity(t), zero, zero, rho * phi.acceleration(t))

    return rule


def _check_warp(r: GeneratorRecipe, AB) -> None:
    """Case-1 families need m = |x_t| bounded away from zero (and positive)."""
    s_min, s_max, t_min, t_max = r.domain
    ss, ts = np.linspace(s_min, s_max, 41), np.linspace(t_min, t_max, 41)
    psi = np.array([r.psi(t) for t in ts])
    if r.constant_angle:
        m = math.sin(float(r.theta)) * (ss[:, None] + psi[None, :])
    else:
        m = np.array([AB(s)[1] for s in ss])[:, None] + psi[None, :]
    if np.min(m) <= 1e-6:
        i, k = np.unravel_index(np.argmin(m), m.shape)
        _fail(f"warping function m must stay positive; m={m[i, k]:.3g} at (s, t)=({ss[i]:.6g}, {ts[k]:.6g})")


def generate(recipe: GeneratorRecipe) -> SurfacePatch:
    """Build the surface of ``recipe`` as a patch with analytic jets."""
    validate_recipe(recipe)
    fam = recipe.family
    AB = _theta_table(recipe) if not recipe.constant_angle else None
    if recipe.case == 1:
        _check_warp(recipe, AB)
        gamma = gamma_curve(recipe)
        rule = _jet_nc1(recipe, AB, gamma) if fam == "NC-1" else _jet_c1(recipe, gamma)
    else:
        w = np.asarray(recipe.direction, float)
        gamma = None
        rule = _jet_nc2(recipe, AB, w) if fam == "NC-2" else _jet_c2(recipe, w)
    return SurfacePatch(
        map=lambda s, t: rule(s, t).x,
        domain=recipe.domain,
        jet_rule=rule,
        label=recipe.label or fam,
        metadata={"family": fam, "recipe": recipe, "gamma": gamma, "AB": AB},
    )
