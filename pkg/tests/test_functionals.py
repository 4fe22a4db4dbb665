import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geomtomo.bodies import (
    SupportBody2D,
    ball,
    cube,
    ellipsoid,
    l2_sum,
    perturbation_body,
    planar_seed,
    sphere_function,
)
from geomtomo.functionals import (
    frac_derivative,
    isotropic_constant_estimate,
    parallel_section,
    perimeter_2d,
    projection_length_2d,
    radial_mesh,
    radial_moment,
    section_area,
    shadow_area,
    support_function,
    support_point,
    volume,
    volume_mc,
)
from geomtomo.sphere import sample_sphere

SQRT11 = math.sqrt(1.1)
SQUARE = SupportBody2D(lambda t: np.abs(np.cos(t)) + np.abs(np.sin(t)), "square")


def test_volume_examples():
    assert abs(volume(ball(3, 1)) - 4 * math.pi / 3) < 1e-12
    assert abs(volume(planar_seed("E0", 0.1)) - math.pi / SQRT11) < 1e-12
    assert abs(volume(planar_seed("K0", 0.1)) - math.pi / SQRT11) < 1e-12
    assert abs(volume(ellipsoid([1, 2, 3])) - 8 * math.pi) < 1e-9


def test_volume_quadrature_vs_monte_carlo():
    K = l2_sum(planar_seed("K0", 0.3), ball(1, 1))
    est = volume_mc(K, 200_000, seed=3)
    assert abs(volume(K) - est.value) < 3 * est.error


def test_section_area_examples():
    for theta in sample_sphere(3, 5, 1):
        assert abs(section_area(ball(3, 1), theta).value - math.pi) < 1e-12
    v = section_area(planar_seed("K0", 0.1), [0.0, 1.0])
    assert abs(v.value - 2.0) < 1e-12
    # axis-aligned slice of an ellipsoid
    assert abs(section_area(ellipsoid([1, 1, 2]), [0, 0, 1]).value - math.pi) < 1e-10
    assert abs(section_area(ellipsoid([1, 1, 2]), [1, 0, 0]).value - 2 * math.pi) < 1e-10


def test_shadow_area_examples():
    # polyhedral approximation at the default 256 x 512 mesh
    assert abs(shadow_area(ball(3, 1), [0.3, 0.4, 0.5]) - math.pi) < 1e-5
    E = ellipsoid([1, 1, 2])
    assert abs(shadow_area(E, [0, 0, 1]) - math.pi) < 1e-5
    assert abs(shadow_area(E, [1, 0, 0]) - 2 * math.pi) < 1e-5


def test_shadow_dominates_section():
    K = perturbation_body(sphere_function("P2"), 0.05, 1.0)
    for theta in sample_sphere(3, 6, 2):
        assert shadow_area(K, theta) >= section_area(K, theta).value - 1e-6


def test_mesh_is_closed():
    mesh = radial_mesh(ellipsoid([1, 1.5, 0.7]), 16, 32)
    tri = mesh.triangles
    edges = {}
    for f in tri:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    assert set(edges.values()) == {2}


def test_mesh_area_converges():
    E = ellipsoid([1, 1, 1])
    areas = [radial_mesh(E, m, 2 * m).areas.sum() for m in (16, 32, 64)]
    errs = [abs(a - 4 * math.pi) for a in areas]
    assert errs[2] < errs[1] < errs[0]


def test_projection_length_examples():
    assert abs(projection_length_2d(ball(2, 1), [1.0, 0.0]) - 2) < 1e-12
    assert abs(projection_length_2d(SQUARE, [0.0, 1.0]) - 2) < 1e-12
    assert abs(projection_length_2d(planar_seed("E0", 0.1), [0.0, 1.0]) - 2) < 1e-9


def test_perimeter_examples():
    assert abs(perimeter_2d(ball(2, 1.5)) - 3 * math.pi) < 1e-10
    assert abs(perimeter_2d(SQUARE) - 8) < 1e-5
    p = perimeter_2d(planar_seed("E0", 0.1))
    assert 2 * math.pi / SQRT11 < p < 2 * math.pi


def test_parallel_section_examples():
    e3 = [0.0, 0.0, 1.0]
    assert abs(parallel_section(ball(3, 1), e3, 0.5) - 3 * math.pi / 4) < 1e-8
    assert parallel_section(ball(3, 1), e3, 1.0) == 0.0
    K = l2_sum(planar_seed("K0", 0.2), ball(1, 1))
    for theta in sample_sphere(3, 4, 3):
        a0 = parallel_section(K, theta, 0.0)
        assert abs(a0 - section_area(K, theta).value) < 1e-4


def test_parallel_section_off_axis_ellipsoid():
    a = np.array([1.0, 1.4, 0.8])
    E = ellipsoid(a)
    theta = np.array([0.6, 0.0, 0.8])
    h = float(np.sqrt(np.sum((a * theta) ** 2)))
    z = np.array([0.0, 0.3, 0.6, 0.9 * h])
    # slices of an ellipsoid scale like (1 - z^2/h^2) times the central one
    exact = math.pi * a.prod() / h * (1 - z**2 / h**2)
    assert np.max(np.abs(parallel_section(E, theta, z) - exact)) < 1e-8


def test_parallel_section_brunn_monotone():
    K = perturbation_body(sphere_function("P2"), 0.05, 1.0)
    theta = np.array([0.3, 0.5, 0.81])
    h = support_function(K, theta[None, :])[0]
    vals = parallel_section(K, theta, np.linspace(0, h, 25))
    assert np.all(np.diff(vals) <= 1e-9)


def test_support_point_2d_and_3d():
    E = ellipsoid([2.0, 1.0])
    theta = np.array([0.6, 0.8])
    x = support_point(E, theta)
    assert abs(x @ theta - support_function(E, theta[None, :])[0]) < 1e-9
    assert E.gauge(x)[0] == pytest.approx(1.0, abs=1e-6)
    E3 = ellipsoid([1.0, 1.5, 0.7])
    t3 = np.array([0.2, -0.4, 0.9]) / np.linalg.norm([0.2, -0.4, 0.9])
    x3 = support_point(E3, t3)
    assert abs(x3 @ t3 - np.sqrt(np.sum((np.array([1.0, 1.5, 0.7]) * t3) ** 2))) < 1e-8


def test_frac_derivative_ball():
    e3 = [0.0, 0.0, 1.0]
    assert abs(frac_derivative(ball(3, 1), e3, -0.5) - 1.6 * math.sqrt(math.pi)) < 1e-6
    assert abs(frac_derivative(ball(3, 1), e3, -1e-3) - math.pi) < 1e-2
    with pytest.raises(ValueError):
        frac_derivative(ball(3, 1), e3, 0.0)
    with pytest.raises(ValueError):
        frac_derivative(ball(3, 1), e3, 1.2)


def test_frac_derivative_ball_closed_form():
    # A(t) = pi(1 - t^2): D^q = pi (1/(-q) - 1/(2-q)) / Gamma(-q)
    for q in (-0.8, -0.3, 0.3, 0.7):
        exact = math.pi * (1 / -q - 1 / (2 - q)) / math.gamma(-q)
        assert abs(frac_derivative(ball(3, 1), [0, 0, 1.0], q) - exact) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.one_of(st.floats(-0.95, -0.05), st.floats(0.05, 0.95)))
def test_frac_derivative_continuous_in_q(q):
    e3 = [0.0, 0.0, 1.0]
    a = frac_derivative(ball(3, 1), e3, q)
    for dq in (-1e-3, 1e-3):
        assert abs(a - frac_derivative(ball(3, 1), e3, q + dq)) <= 1e-2


def test_radial_moment_examples():
    for p in (-1, 0, 1, 2.5):
        assert abs(radial_moment(ball(3, 1), p) - 1) < 1e-12
    assert abs(radial_moment(planar_seed("E0", 0.1), 0) - 1 / SQRT11) < 1e-12
    assert abs(radial_moment(planar_seed("K0", 0.1), 0) - 1 / SQRT11) < 1e-12
    with pytest.raises(ValueError):
        radial_moment(ball(3, 1), -3)


def test_isotropic_constant_examples():
    assert abs(isotropic_constant_estimate(cube(3)) - 1 / math.sqrt(12)) < 0.01
    lb = isotropic_constant_estimate(ball(3, 1))
    assert abs(lb - math.sqrt(0.2) / (4 * math.pi / 3) ** (1 / 3)) < 0.005
    le = isotropic_constant_estimate(ellipsoid([2, 1, 1]))
    assert abs(le / lb - 1) < 0.02
