"""Small numerical kernels: finite differences, adaptive Simpson quadrature,
arc-length reparametrization, Gram-Schmidt complements in R^4 and closed-form
2x2 symmetric eigenproblems.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateTangentError, DomainError, QuadratureError, RegularityError

_EPS = np.finfo(float).eps


def fd_step_1(x: float) -> float:
    return max(1e-5, 1e-5 * abs(x))


def fd_step_2(x: float) -> float:
    return max(1e-4, 1e-4 * abs(x))


@dataclass(frozen=True)
class SmoothFunction1D:
    """A real function on ``domain`` with optional analytic derivatives."""

    f: Callable[[float], float]
    df: Optional[Callable[[float], float]] = None
    d2f: Optional[Callable[[float], float]] = None
    domain: tuple[float, float] = (-math.inf, math.inf)

    def check(self, x: float) -> None:
        a, b = self.domain
        if not (a <= x <= b):
            raise DomainError(f"x={x!r} outside domain [{a!r}, {b!r}]", x)

    def __call__(self, x: float) -> float:
        self.check(x)
        return float(self.f(x))

    def derivative(self, x: float) -> float:
        if self.df is not None:
            self.check(x)
            return float(self.df(x))
        return central_diff_1(self, x)

    def second_derivative(self, x: float) -> float:
        if self.d2f is not None:
            self.check(x)
            return float(self.d2f(x))
        return central_diff_2(self, x)

    @classmethod
    def constant(cls, c: float, domain=(-math.inf, math.inf)) -> "SmoothFunction1D":
        c = float(c)
        return cls(lambda x: c, lambda x: 0.0, lambda x: 0.0, domain)

    @classmethod
    def polynomial(cls, coefficients, domain=(-math.inf, math.inf)) -> "SmoothFunction1D":
        """Polynomial with ascending coefficients ``c0 + c1 x + c2 x^2 + ...``."""
        p = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
        dp, d2p = p.deriv(1), p.deriv(2)
        return cls(lambda x: float(p(x)), lambda x: float(dp(x)), lambda x: float(d2p(x)), domain)


def _evaluate(f, x: float) -> float:
    return float(f(x))


def _stencil_check(f, x: float, h: float) -> None:
    if isinstance(f, SmoothFunction1D):
        a, b = f.domain
        if x - h < a or x + h > b:
            raise DomainError(f"stencil [{x - h!r}, {x + h!r}] leaves domain [{a!r}, {b!r}]", x)


def central_diff_1(f, x: float, h: Optional[float] = None, analytic: bool = False) -> float:
    """Central first difference ``(f(x+h) - f(x-h)) / 2h``.

    With ``analytic=True`` and an analytic derivative available on ``f`` that
    derivative is returned instead.
    """
    if analytic and isinstance(f, SmoothFunction1D) and f.df is not None:
        return f.derivative(x)
    if h is None:
        h = fd_step_1(x)
    _stencil_check(f, x, h)
    return (_evaluate(f, x + h) - _evaluate(f, x - h)) / (2.0 * h)


def central_diff_2(f, x: float, h: Optional[float] = None) -> float:
    """Central second difference ``(f(x+h) - 2 f(x) + f(x-h)) / h^2``."""
    if h is None:
        h = fd_step_2(x)
    _stencil_check(f, x, h)
    return (_evaluate(f, x + h) - 2.0 * _evaluate(f, x) + _evaluate(f, x - h)) / (h * h)


def integrate(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 30) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    The estimated absolute error is at most ``tol``. Raises QuadratureError
    carrying the best estimate when ``max_depth`` halvings do not suffice.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, tol, max_depth)
    if isinstance(f, SmoothFunction1D):
        f.check(a)
        f.check(b)

    fa, fb = _evaluate(f, a), _evaluate(f, b)
    m = 0.5 * (a + b)
    fm = _evaluate(f, m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    pieces: list[float] = []
    err = 0.0
    failed = False
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = _evaluate(f, lm), _evaluate(f, rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        scale = abs(left) + abs(right) + (hi - lo) * (abs(flo) + abs(fmid) + abs(fhi))
        converged = depth >= 2 and abs(delta) <= 15.0 * eps
        at_roundoff = abs(delta) <= 64.0 * _EPS * scale or not (lo < lm < mid < rm < hi)
        if converged or at_roundoff or depth >= max_depth:
            if depth >= max_depth and not (converged or at_roundoff):
                failed = True
            pieces.append(left + right + delta / 15.0)
            err += abs(delta) / 15.0
            continue
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))

    total = math.fsum(pieces)
    if failed and err > tol:
        raise QuadratureError(f"adaptive Simpson did not converge on [{a!r}, {b!r}]", total, err)
    return total


# --------------------------------------------------------------------------
# curves in R^4


def _one_sided(t: float, h: float, reach: int, domain) -> int:
    """+1/-1 for a forward/backward stencil of ``reach`` steps, 0 for central."""
    a, b = domain
    if a <= t - h and t + h <= b:
        return 0
    if t + reach * h <= b and t >= a:
        return 1
    if t - reach * h >= a and t <= b:
        return -1
    raise DomainError(f"stencil around t={t!r} leaves domain {domain}", t)


def _fd_vector_1(value, t: float, domain) -> np.ndarray:
    h = fd_step_1(t)
    side = _one_sided(t, h, 2, domain)
    if side == 0:
        return (value(t + h) - value(t - h)) / (2.0 * h)
    # second-order one-sided stencil at the ends of the domain
    h = side * h
    return (-3.0 * value(t) + 4.0 * value(t + h) - value(t + 2 * h)) / (2.0 * h)


def _fd_vector_2(value, t: float, domain) -> np.ndarray:
    h = fd_step_2(t)
    side = _one_sided(t, h, 3, domain)
    if side == 0:
        return (value(t + h) - 2.0 * value(t) + value(t - h)) / (h * h)
    h = side * h
    return (2.0 * value(t) - 5.0 * value(t + h) + 4.0 * value(t + 2 * h) - value(t + 3 * h)) / (h * h)


@dataclass(eq=False)
class Curve4:
    """A parametrized curve in R^4; missing derivative rules fall back to central differences."""

    value_rule: Callable[[float], np.ndarray]
    velocity_rule: Optional[Callable[[float], np.ndarray]] = None
    acceleration_rule: Optional[Callable[[float], np.ndarray]] = None
    domain: tuple[float, float] = (-math.inf, math.inf)

    def _check(self, t: float) -> None:
        a, b = self.domain
        if not (a <= t <= b):
            raise DomainError(f"t={t!r} outside curve domain [{a!r}, {b!r}]", t)

    def __call__(self, t: float) -> np.ndarray:
        self._check(t)
        return np.asarray(self.value_rule(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        if self.velocity_rule is None:
            return _fd_vector_1(self, t, self.domain)
        self._check(t)
        return np.asarray(self.velocity_rule(t), dtype=float)

    def acceleration(self, t: float) -> np.ndarray:
        if self.acceleration_rule is None:
            return _fd_vector_2(self, t, self.domain)
        self._check(t)
        return np.asarray(self.acceleration_rule(t), dtype=float)

    def speed(self, t: float) -> float:
        return float(np.linalg.norm(self.velocity(t)))


class ArcLengthCurve(Curve4):
    """Unit-speed reparametrization ``u -> c(t(u))`` of a regular curve.

    ``t(u)`` inverts the tabulated length function by safeguarded Newton steps;
    each step integrates the speed over a single table segment.
    """

    def __init__(self, base: Curve4, interval: tuple[float, float], tol: float = 1e-10,
                 segments: int = 256, min_speed: float = 1e-8):
        a, b = map(float, interval)
        if not a < b:
            raise ValueError("interval must have positive length")
        probe = np.linspace(a, b, 4 * segments + 1)
        for t in probe:
            if base.speed(t) < min_speed:
                raise RegularityError(f"speed below {min_speed} at t={t!r}", float(t))
        self.base = base
        self.tol = tol
        self._nodes = list(np.linspace(a, b, segments + 1))
        quad_tol = max(tol * 1e-3, 1e-14)
        lengths = [0.0]
        for lo, hi in zip(self._nodes[:-1], self._nodes[1:]):
            lengths.append(lengths[-1] + integrate(base.speed, lo, hi, quad_tol))
        self._lengths = lengths
        self._quad_tol = quad_tol
        self.length = lengths[-1]
        self._inverse = lru_cache(maxsize=8192)(self._invert)
        super().__init__(self._value, self._velocity, self._acceleration, (0.0, self.length))

    def _invert(self, u: float) -> float:
        nodes, lengths = self._nodes, self._lengths
        if u <= 0.0:
            return nodes[0]
        if u >= self.length:
            return nodes[-1]
        i = min(bisect.bisect_right(lengths, u) - 1, len(nodes) - 2)
        lo, hi = nodes[i], nodes[i + 1]
        t = lo + (hi - lo) * (u - lengths[i]) / (lengths[i + 1] - lengths[i])
        for _ in range(60):
            g = lengths[i] + integrate(self.base.speed, nodes[i], t, self._quad_tol) - u
            if g > 0:
                hi = t
            else:
                lo = t
            if abs(g) <= 4.0 * _EPS * max(1.0, self.length):
                break
            step = t - g / self.base.speed(t)
            t = step if lo < step < hi else 0.5 * (lo + hi)
        return t

    def parameter(self, u: float) -> float:
        """Original parameter ``t`` with arc length ``u`` from the start."""
        return self._inverse(float(u))

    def _value(self, u: float) -> np.ndarray:
        return self.base(self.parameter(u))

    def _velocity(self, u: float) -> np.ndarray:
        v = self.base.velocity(self.parameter(u))
        return v / np.linalg.norm(v)

    def _acceleration(self, u: float) -> np.ndarray:
        t = self.parameter(u)
        v = self.base.velocity(t)
        speed = np.linalg.norm(v)
        tangent = v / speed
        acc = self.base.acceleration(t)
        return (acc - tangent * (tangent @ acc)) / speed**2


def arc_length_reparametrize(c: Curve4, interval: Optional[tuple[float, float]] = None,
                             tol: float = 1e-10) -> ArcLengthCurve:
    """Return the unit-speed reparametrization of ``c`` restricted to ``interval``.

    The new parameter runs over ``[0, L]`` with ``L`` the length, and the new
    curve starts at ``c(interval[0])``.
    """
    if interval is None:
        interval = c.domain
    return ArcLengthCurve(c, interval, tol)


# --------------------------------------------------------------------------
# linear algebra


def gram_schmidt(vectors, tol: float = 1e-12) -> list[np.ndarray]:
    """Orthonormalize ``vectors`` in order (modified Gram-Schmidt, one re-pass)."""
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=float)
        norm0 = np.linalg.norm(w)
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        n = np.linalg.norm(w)
        if norm0 == 0.0 or n <= tol * max(1.0, norm0):
            raise DegenerateTangentError("vectors are linearly dependent", None)
        basis.append(w / n)
    return basis


def complete_basis(vectors) -> list[np.ndarray]:
    """Orthonormal basis of the orthogonal complement of ``span(vectors)`` in R^4.

    Standard axes are rejected against the current basis and the axis with the
    largest rejection is taken first (lowest index on ties), which makes the
    result deterministic.
    """
    basis = gram_schmidt(vectors)
    out = []
    while len(basis) < 4:
        best, best_norm = None, -1.0
        for axis in np.eye(4):
            r = axis.copy()
            for _pass in range(2):
                for q in basis:
                    r -= (q @ r) * q
            n = np.linalg.norm(r)
            if n > best_norm + 1e-12:
                best, best_norm = r, n
        w = best / best_norm
        basis.append(w)
        out.append(w)
    return out


def orthonormal_complement(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the complement of ``span{u, v}`` (see :func:`complete_basis`)."""
    n1, n2 = complete_basis([u, v])
    return n1, n2


@dataclass(frozen=True)
class Sym2Matrix:
    a11: float
    a12: float
    a22: float

    @classmethod
    def from_array(cls, m) -> "Sym2Matrix":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a12


def _fix_sign(v: np.ndarray) -> np.ndarray:
    for c in v:
        if c != 0.0:
            return v if c > 0 else -v
    return v


def sym2_eigen(m: Sym2Matrix) -> list[tuple[float, np.ndarray]]:
    """Closed-form eigenpairs of a symmetric 2x2 matrix.

    The pair whose eigenvector is closest to the first axis comes first (larger
    eigenvalue first on a tie); eigenvectors have their first nonzero
    component positive.
    """
    a, b, c = m.a11, m.a12, m.a22
    if b == 0.0:
        return [(a, np.array([1.0, 0.0])), (c, np.array([0.0, 1.0]))]
    mean = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), b)
    phi = 0.5 * math.atan2(2.0 * b, a - c)
    v1 = _fix_sign(np.array([math.cos(phi), math.sin(phi)]))
    v2 = _fix_sign(np.array([-math.sin(phi), math.cos(phi)]))
    pairs = [(mean + radius, v1), (mean - radius, v2)]
    if abs(v2[0]) > abs(v1[0]) + 1e-12:
        pairs.reverse()
    return pairs
