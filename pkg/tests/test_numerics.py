import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpd4.errors import DegenerateTangentError, DomainError, QuadratureError, RegularityError
from cpd4.numerics import (
    Curve4,
    SmoothFunction1D,
    Sym2Matrix,
    arc_length_reparametrize,
    central_diff_1,
    central_diff_2,
    complete_basis,
    gram_schmidt,
    integrate,
    orthonormal_complement,
    sym2_eigen,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


# -- finite differences ---------------------------------------------------

def test_first_difference_exact_on_quadratic():
    f = SmoothFunction1D(lambda x: x * x)
    assert central_diff_1(f, 3.0, 1e-4) == pytest.approx(6.0, abs=1e-7)


@given(finite)
def test_first_difference_of_constant_is_zero(x):
    assert central_diff_1(SmoothFunction1D(lambda _: 4.2), x) == 0.0


def test_first_difference_matches_cosine():
    assert abs(central_diff_1(SmoothFunction1D(math.sin), 0.7) - math.cos(0.7)) < 1e-7


@pytest.mark.parametrize("x", [-3.0, 0.0, 0.4, 12.0])
def test_second_difference_of_square(x):
    assert central_diff_2(SmoothFunction1D(lambda u: u * u), x) == pytest.approx(2.0, abs=1e-5)


def test_second_difference_of_linear_and_exp():
    assert abs(central_diff_2(SmoothFunction1D(lambda x: 3 * x - 1), 2.0)) < 1e-6
    assert abs(central_diff_2(SmoothFunction1D(math.exp), 0.0) - 1.0) < 1e-5


def test_stencil_outside_domain_raises():
    f = SmoothFunction1D(math.sqrt, domain=(0.0, 4.0))
    with pytest.raises(DomainError):
        central_diff_1(f, 0.0)
    with pytest.raises(DomainError):
        f(5.0)


def test_analytic_derivative_used_on_request():
    f = SmoothFunction1D.polynomial([1.0, 2.0, 3.0])
    assert central_diff_1(f, 2.0, analytic=True) == 14.0
    assert f.second_derivative(-1.0) == 6.0


# -- quadrature -----------------------------------------------------------

def test_integrate_sine():
    assert abs(integrate(math.sin, 0.0, math.pi, tol=1e-10) - 2.0) < 1e-10


def test_integrate_empty_interval_is_exactly_zero():
    assert integrate(math.exp, 1.3, 1.3) == 0.0


def test_integrate_arctan():
    assert abs(integrate(lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, tol=1e-10) - math.atan(1.0)) < 1e-10


def test_integrate_reports_failure():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: math.sin(1.0 / x) / x, 1e-6, 1.0, tol=1e-12, max_depth=6)
    assert math.isfinite(info.value.estimate)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_integrate_is_additive_and_antisymmetric(a, b, c):
    f = lambda x: math.cos(3 * x) + x * x
    whole = integrate(f, a, c)
    split = integrate(f, a, b) + integrate(f, b, c)
    assert abs(whole - split) < 1e-9
    assert integrate(f, c, a) == -whole


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-1, 0), st.floats(0, 1.5))
def test_integrate_polynomials_against_antiderivative(coeffs, a, b):
    p = np.polynomial.Polynomial(coeffs)
    exact = p.integ()(b) - p.integ()(a)
    assert abs(integrate(lambda x: float(p(x)), a, b, tol=1e-11) - exact) < 1e-9


# -- curves and arc length ------------------------------------------------

def _double_speed_circle(with_velocity=True):
    vel = (lambda t: np.array([0.0, -2 * math.sin(2 * t), 2 * math.cos(2 * t), 0.0])) if with_velocity else None
    return Curve4(lambda t: np.array([0.0, math.cos(2 * t), math.sin(2 * t), 0.0]), vel, domain=(0.0, math.pi))


def test_constant_speed_circle_reparametrizes_to_unit_circle():
    c = arc_length_reparametrize(_double_speed_circle())
    assert c.length == pytest.approx(2 * math.pi, abs=1e-10)
    for u in np.linspace(0.0, c.length, 13):
        assert np.allclose(c(u), [0.0, math.cos(u), math.sin(u), 0.0], atol=1e-9)


def test_length_without_analytic_velocity():
    # difference-quotient speed limits the length to roughly h^2 accuracy
    c = arc_length_reparametrize(_double_speed_circle(with_velocity=False))
    assert c.length == pytest.approx(2 * math.pi, abs=1e-8)


def test_unit_speed_curve_gives_identity_map():
    base = Curve4(lambda t: np.array([t, 0.0, math.cos(t), math.sin(t)]) / math.sqrt(2), domain=(0.0, 3.0))
    c = arc_length_reparametrize(base)
    for u in np.linspace(0.0, 3.0, 11):
        assert abs(c.parameter(u) - u) < 1e-9


def test_chirped_circle_reaches_unit_speed():
    base = Curve4(lambda t: np.array([0.0, math.cos(t * t), math.sin(t * t), 0.0]),
                  lambda t: 2 * t * np.array([0.0, -math.sin(t * t), math.cos(t * t), 0.0]), domain=(0.5, 1.5))
    c = arc_length_reparametrize(base)
    h = 1e-5
    speeds = [np.linalg.norm(c(u + h) - c(u - h)) / (2 * h) for u in np.linspace(h, c.length - h, 101)]
    assert max(abs(v - 1.0) for v in speeds) < 1e-6
    assert c.length == pytest.approx(1.5**2 - 0.5**2, abs=1e-10)


def test_arc_length_rejects_stationary_curve():
    base = Curve4(lambda t: np.array([t**3, 0.0, 0.0, 0.0]), lambda t: np.array([3 * t * t, 0.0, 0.0, 0.0]),
                  domain=(-1.0, 1.0))
    with pytest.raises(RegularityError):
        arc_length_reparametrize(base)


def test_curve_velocity_falls_back_to_differences():
    c = Curve4(lambda t: np.array([t, t * t, 0.0, 1.0]), domain=(-2.0, 2.0))
    assert np.allclose(c.velocity(0.5), [1.0, 1.0, 0.0, 0.0], atol=1e-8)
    assert np.allclose(c.acceleration(0.5), [0.0, 2.0, 0.0, 0.0], atol=1e-5)


@pytest.mark.parametrize("t", [-2.0, 2.0])
def test_curve_differences_turn_one_sided_at_the_ends(t):
    c = Curve4(lambda u: np.array([u**3, u, 0.0, 0.0]), domain=(-2.0, 2.0))
    assert np.allclose(c.velocity(t), [3 * t * t, 1.0, 0.0, 0.0], atol=1e-8)
    assert np.allclose(c.acceleration(t), [6 * t, 0.0, 0.0, 0.0], atol=1e-5)


# -- orthonormal frames ---------------------------------------------------

def test_complement_of_first_axes():
    n1, n2 = orthonormal_complement([1, 0, 0, 0], [0, 1, 0, 0])
    assert np.allclose(n1, [0, 0, 1, 0]) and np.allclose(n2, [0, 0, 0, 1])


def test_dependent_vectors_rejected():
    with pytest.raises(DegenerateTangentError):
        gram_schmidt([[1, 2, 0, 0], [2, 4, 0, 0]])


vec4 = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4)


@settings(max_examples=150)
@given(vec4, vec4)
def test_complement_completes_an_orthonormal_basis(u, v):
    u, v = np.array(u), np.array(v)
    if np.linalg.norm(u) < 1e-3 or np.linalg.norm(v - (u @ v) / (u @ u) * u) < 1e-3:
        return
    q = np.column_stack(gram_schmidt([u, v]) + complete_basis([u, v]))
    assert np.abs(q.T @ q - np.eye(4)).max() < 1e-12


# -- symmetric 2x2 eigenproblem -------------------------------------------

def test_diagonal_eigenpairs():
    (l1, v1), (l2, v2) = sym2_eigen(Sym2Matrix(3.0, 0.0, -1.0))
    assert (l1, l2) == (3.0, -1.0)
    assert np.array_equal(v1, [1.0, 0.0]) and np.array_equal(v2, [0.0, 1.0])


def test_swap_matrix_eigenpairs():
    pairs = sym2_eigen(Sym2Matrix(0.0, 1.0, 0.0))
    values = sorted(lam for lam, _ in pairs)
    assert values == pytest.approx([-1.0, 1.0], abs=1e-15)
    for lam, v in pairs:
        assert np.allclose(v, [1 / math.sqrt(2), lam / math.sqrt(2)])


def test_eigenvalues_from_characteristic_polynomial():
    m = Sym2Matrix(2.0, 1.0, 2.0)
    got = sorted(lam for lam, _ in sym2_eigen(m))
    # roots of x^2 - tr x + det
    disc = math.sqrt(m.trace**2 - 4 * m.det)
    assert got == pytest.approx(sorted([(m.trace - disc) / 2, (m.trace + disc) / 2]), abs=1e-14)


@settings(max_examples=300)
@given(finite, finite, finite)
def test_eigen_reconstruction(a, b, c):
    m = Sym2Matrix(a, b, c)
    pairs = sym2_eigen(m)
    rebuilt = sum(lam * np.outer(v, v) for lam, v in pairs)
    scale = max(1.0, abs(a), abs(b), abs(c))
    assert np.abs(rebuilt - m.as_array()).max() < 1e-12 * scale
    (_, v1), (_, v2) = pairs
    assert abs(v1 @ v2) < 1e-12 and abs(v1 @ v1 - 1) < 1e-12
