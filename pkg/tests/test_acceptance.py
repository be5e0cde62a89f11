"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``; the summary of
criteria is printed at the end of the session.
"""

import math

import numpy as np
import pytest

from cpd4.analysis import CpdContext, grid_nodes, lemma_residuals, sample_point, verify_cpd
from cpd4.errors import DegenerateAngleError
from cpd4.generators import FAMILIES, generate, spiral_curve
from cpd4.geometry import (
    first_fundamental_form,
    gauss_curvature_extrinsic,
    gauss_curvature_intrinsic,
    jet,
    normal_commutator,
    second_fundamental,
    tangent_frame,
)
from cpd4.numerics import Sym2Matrix, arc_length_reparametrize, integrate, sym2_eigen
from cpd4.surfaces import coordinate_plane, generic_graph_surface

from _recipes import c2_basic, fixed_recipes, m_closed_form, nc1_latitude, random_recipes

CTX = CpdContext()
N_PER_FAMILY = 6  # 24 randomized recipes in total


@pytest.fixture(scope="module")
def random_surfaces():
    recipes = random_recipes(N_PER_FAMILY, seed=20261015)
    return [(r, generate(r)) for r in recipes]


@pytest.fixture(scope="module")
def random_reports(random_surfaces):
    return [(r, verify_cpd(s, CTX, (20, 20))) for r, s in random_surfaces]


@pytest.fixture(scope="module")
def all_surfaces(random_surfaces):
    fixed = [(r, generate(r)) for r in fixed_recipes().values()]
    return fixed + random_surfaces


def interior_points(domain, n, seed, margin=0.02):
    rng = np.random.default_rng(seed)
    s0, s1, t0, t1 = domain
    return [(float(rng.uniform(s0 + margin, s1 - margin)), float(rng.uniform(t0 + margin, t1 - margin)))
            for _ in range(n)]


def test_c01_generated_surfaces_are_cpd(random_reports, criterion):
    families = {r.family for r, _ in random_reports}
    worst = max(rep.max_offdiag for _, rep in random_reports)
    verdicts = {rep.verdict for _, rep in random_reports}
    ok = len(random_reports) >= 20 and families == set(FAMILIES) and verdicts == {"CPD"} and worst < 1e-5
    assert criterion(1, "converse classification: randomized recipes verify as CPD", ok,
                     f"{len(random_reports)} recipes, max offdiag {worst:.2e}")


def test_c02_angle_consequences(random_reports, criterion):
    h4_11 = max(rep.max_h4_11 for _, rep in random_reports)
    h3_11 = max(rep.max_h3_11_plus_e1_theta for _, rep in random_reports)
    e2 = max(rep.max_e2_theta for _, rep in random_reports)
    ok = h4_11 < 1e-5 and h3_11 < 1e-4 and e2 < 1e-6
    assert criterion(2, "h4_11 = 0, h3_11 = -e1(theta), e2(theta) = 0", ok,
                     f"{h4_11:.2e} / {h3_11:.2e} / {e2:.2e}")


def test_c03_codazzi_and_m_residuals(criterion):
    worst = {}
    for name, recipe in fixed_recipes().items():
        if name not in FAMILIES:
            continue
        surface = generate(recipe)
        res = [lemma_residuals(surface, CTX, s, t) for s, t in interior_points(recipe.domain, 50, seed=len(worst))]
        worst[name] = max(max(r.codazzi, abs(r.r_m)) for r in res)
    top = max(worst.values())
    ok = set(worst) == set(FAMILIES) and top < 1e-4
    assert criterion(3, "Codazzi and m-equation residuals at 50 points per family", ok, f"max {top:.2e}")


def _nc1_closed_form_error(recipe):
    surface = generate(recipe)
    err = 0.0
    for s in grid_nodes(recipe.domain, 20, 20)[0]:
        for t in grid_nodes(recipe.domain, 20, 20)[1]:
            s, t = float(s), float(t)
            p = sample_point(surface, CTX, s, t)
            th, dth = recipe.theta(s), recipe.theta.derivative(s)
            m = m_closed_form(recipe, s, t)
            m_s = math.sin(th)
            expect3 = np.diag([-dth, m_s / (math.tan(th) * m)])
            expect4 = np.diag([0.0, 1.0 / m])
            err = max(err, np.abs(p.sfd.S3.as_array() - expect3).max(), np.abs(p.sfd.S4.as_array() - expect4).max())
    return err


def _c2_closed_form_error(recipe):
    surface = generate(recipe)
    err = 0.0
    s_nodes, t_nodes = grid_nodes(recipe.domain, 20, 20)
    for s in s_nodes:
        for t in t_nodes:
            p = sample_point(surface, CTX, float(s), float(t))
            expect4 = np.diag([0.0, 1.0 / recipe.rho])
            err = max(err, np.abs(p.sfd.S3.as_array()).max(), np.abs(p.sfd.S4.as_array() - expect4).max())
    return err


def test_c04_shape_operator_closed_forms(criterion):
    nc1 = _nc1_closed_form_error(nc1_latitude())
    c2 = max(_c2_closed_form_error(c2_basic(rho)) for rho in (0.7, 1.0, 1.8))
    ok = nc1 < 1e-5 and c2 < 1e-6
    assert criterion(4, "closed-form shape operators (NC-1, C-2)", ok, f"NC-1 {nc1:.2e}, C-2 {c2:.2e}")


def test_c05_case2_surfaces_are_flat(all_surfaces, criterion):
    k_ext = k_int = 0.0
    for recipe, surface in all_surfaces:
        if recipe.case != 2:
            continue
        for s, t in interior_points(recipe.domain, 20, seed=5):
            j = jet(surface, s, t)
            k_ext = max(k_ext, abs(gauss_curvature_extrinsic(second_fundamental(j, tangent_frame(j)))))
            k_int = max(k_int, abs(gauss_curvature_intrinsic(surface, s, t)))
    ok = k_ext < 1e-6 and k_int < 1e-5
    assert criterion(5, "Case-2 families are flat", ok, f"K_ext {k_ext:.2e}, K_int {k_int:.2e}")


def test_c06_gauss_equation(all_surfaces, criterion):
    worst = 0.0
    for recipe, surface in all_surfaces:
        for s, t in interior_points(recipe.domain, 20, seed=6):
            j = jet(surface, s, t)
            k_ext = gauss_curvature_extrinsic(second_fundamental(j, tangent_frame(j)))
            worst = max(worst, abs(k_ext - gauss_curvature_intrinsic(surface, s, t)))
    assert criterion(6, "|K_ext - K_int| on generated surfaces", worst < 1e-4, f"max {worst:.2e}")


def test_c07_flat_normal_bundle(all_surfaces, criterion):
    worst = 0.0
    for recipe, surface in all_surfaces:
        for s, t in interior_points(recipe.domain, 20, seed=7):
            j = jet(surface, s, t)
            worst = max(worst, normal_commutator(second_fundamental(j, tangent_frame(j))))
    assert criterion(7, "shape operators commute", worst < 1e-6, f"max |[S3,S4]| {worst:.2e}")


def test_c08_metric_form(all_surfaces, criterion):
    e_err = f_err = m_err = 0.0
    for recipe, surface in all_surfaces:
        for s, t in interior_points(recipe.domain, 20, seed=8):
            ff = first_fundamental_form(jet(surface, s, t))
            e_err = max(e_err, abs(ff.E - 1.0))
            f_err = max(f_err, abs(ff.F))
            m_err = max(m_err, abs(ff.m - m_closed_form(recipe, s, t)))
    ok = e_err < 1e-8 and f_err < 1e-8 and m_err < 1e-6
    assert criterion(8, "metric ds^2 + m^2 dt^2 with closed-form m", ok,
                     f"E {e_err:.2e}, F {f_err:.2e}, m {m_err:.2e}")


def test_c09_negative_controls(criterion):
    graph = verify_cpd(generic_graph_surface(), CTX, (20, 20))
    plane = coordinate_plane()
    try:
        sample_point(plane, CTX, 0.3, -0.2)
        kind = None
    except DegenerateAngleError as exc:
        kind = exc.kind
    plane_report = verify_cpd(plane, CTX, (10, 10))
    ok = (graph.verdict == "not-CPD" and graph.max_offdiag > 1e-2 and kind == "theta~0"
          and plane_report.verdict == "inconclusive")
    assert criterion(9, "negative controls (generic graph, degenerate plane)", ok,
                     f"graph offdiag {graph.max_offdiag:.2e}, plane error {kind}")


def test_c10_kernel_accuracy(criterion):
    quad = abs(integrate(math.sin, 0.0, math.pi) - 2.0)

    curve = arc_length_reparametrize(spiral_curve(0.3, 0.6, 1.0))
    u_hi = curve.domain[1]
    h = 1e-5
    # speed from positions, so errors in the parameter inversion show up
    speed = max(abs(np.linalg.norm(curve(u + h) - curve(u - h)) / (2 * h) - 1.0)
                for u in np.linspace(h, u_hi - h, 201))

    rng = np.random.default_rng(10)
    recon = 0.0
    for a, b, c in rng.uniform(-1.0, 1.0, size=(500, 3)):
        m = Sym2Matrix(a, b, c)
        (l1, v1), (l2, v2) = sym2_eigen(m)
        rebuilt = l1 * np.outer(v1, v1) + l2 * np.outer(v2, v2)
        recon = max(recon, np.abs(rebuilt - m.as_array()).max())
    ok = quad < 1e-10 and speed < 1e-6 and recon < 1e-12
    assert criterion(10, "kernel accuracy (quadrature, arc length, 2x2 eigen)", ok,
                     f"{quad:.1e} / {speed:.1e} / {recon:.1e}")
