import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geomtomo.bodies import (
    SphereFunction,
    SupportBody2D,
    ball,
    convexity_check,
    eps_max,
    ellipsoid,
    equal_distributed_harmonic_pair,
    l2_sum,
    parse_body,
    perturbation_body,
    planar_seed,
    polar_2d,
    rotated,
    scaled,
    sphere_function,
    twisted,
)
from geomtomo.distributions import ks_distance, radial_distribution
from geomtomo.functionals import volume
from geomtomo.sphere import fine_grid, quadrature_grid, sample_sphere, split_arrays


def _dirs(angles):
    a = np.asarray(angles, dtype=float)
    return np.column_stack([np.cos(a), np.sin(a)])


def test_ball_and_ellipsoid_examples():
    x = sample_sphere(3, 100, 0)
    assert np.all(ball(3, 1).rho(x) == 1.0)
    assert np.allclose(ellipsoid([1, 1, 1]).rho(x), 1.0, atol=1e-15)
    e = ellipsoid([2, 1])
    assert np.allclose(e.rho(np.eye(2)), [2, 1])
    with pytest.raises(ValueError):
        ball(3, 0)
    with pytest.raises(ValueError):
        ellipsoid([1, -1])


def test_planar_seed_examples():
    E0 = planar_seed("E0", 0.1)
    K0 = planar_seed("K0", 0.1)
    assert abs(E0.rho_angle(0.0) - 1) < 1e-15
    assert abs(E0.rho_angle(math.pi / 2) - 1.1**-0.5) < 1e-15
    assert abs(K0.rho_angle(math.pi / 4) - 1.1**-0.5) < 1e-15
    with pytest.raises(ValueError, match="eps too large"):
        planar_seed("K0", 10.0)
    with pytest.raises(ValueError):
        planar_seed("X0", 0.1)


def test_eps_max_bounds_convexity():
    m = eps_max("K0")
    assert 0.1 < m < 10
    assert convexity_check(planar_seed("K0", 0.99 * m))
    # the seed refuses anything beyond the bisected limit
    with pytest.raises(ValueError):
        planar_seed("K0", 1.05 * m)


def test_l2_sum_examples():
    B = l2_sum(ball(2, 1), ball(1, 1))
    assert B.n == 3
    assert np.allclose(B.rho(sample_sphere(3, 500, 1)), 1.0, atol=1e-14)
    eps = 0.1
    K = l2_sum(planar_seed("K0", eps), ball(1, 1))
    x = sample_sphere(3, 2000, 2)
    s, _, _, ub = split_arrays(x)
    expected = (1 + eps * s**2 * np.sin(2 * ub) ** 2) ** -0.5
    assert np.max(np.abs(K.rho(x) - expected)) < 1e-12
    E = l2_sum(planar_seed("E0", eps), ball(1, 1))
    assert abs(E.rho(np.array([[0.0, 1.0, 0.0]]))[0] - (1 + eps) ** -0.5) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_l2_sum_associative(seed, a, b):
    A = ellipsoid([a, 1.0])
    Bb = ball(1, b)
    C = ellipsoid([1.0, 2.0])
    left = l2_sum(l2_sum(A, Bb), C)
    right = l2_sum(A, l2_sum(Bb, C))
    x = sample_sphere(5, 200, seed)
    assert np.max(np.abs(left.rho(x) - right.rho(x))) < 1e-12


def test_constructed_bodies_are_positive():
    x3 = sample_sphere(3, 100_000, 3)
    x2 = sample_sphere(2, 100_000, 3)
    for K in (l2_sum(planar_seed("K0", 0.3), ball(1, 1)),
              perturbation_body(sphere_function("P2"), 0.05, 1),
              twisted(ellipsoid([1, 1.3, 0.8]), 0.5)):
        assert np.all(K.rho(x3) > 0)
    for K in (planar_seed("E0", 0.5), planar_seed("K0", 0.2)):
        assert np.all(K.rho(x2) > 0)


def test_even_bodies_are_symmetric():
    x = sample_sphere(3, 1000, 4)
    for K in (ellipsoid([1, 2, 3]), l2_sum(planar_seed("K0", 0.2), ball(1, 1)),
              twisted(ellipsoid([1, 1.3, 0.8]), 0.5)):
        assert K.even
        assert np.max(np.abs(K.rho(x) - K.rho(-x))) < 1e-12


def test_polar_examples():
    assert np.allclose(polar_2d(ball(2, 2.0)).rho(_dirs(np.linspace(0, 6, 50))), 0.5, atol=1e-12)
    E0 = planar_seed("E0", 0.2)
    pp = polar_2d(polar_2d(E0))
    a = np.linspace(0, 2 * math.pi, 97)
    assert np.max(np.abs(pp.rho_angle(a) - E0.rho_angle(a))) < 1e-6
    pe = polar_2d(ellipsoid([2, 1]))
    assert np.max(np.abs(pe.rho_angle(a) - ellipsoid([0.5, 1]).rho_angle(a))) < 1e-8


def test_polar_rejects_nonconvex():
    f = SphereFunction(2, lambda p: np.cos(2 * np.arctan2(p[:, 1], p[:, 0])), True, "cos2")
    bad = perturbation_body(f, 0.9, 1.0, check=False)
    with pytest.raises(ValueError):
        polar_2d(bad)


def test_perturbation_body_examples():
    x = sample_sphere(3, 500, 5)
    zero = sphere_function("zero:3")
    for p in (-0.5, 1.0, 2.0):
        assert np.allclose(perturbation_body(zero, 0.3, p).rho(x), 1.0)
    a = np.linspace(0, 2 * math.pi, 200)
    pb = perturbation_body(sphere_function("sin2"), 0.1, -0.5)
    assert np.max(np.abs(pb.rho_angle(a) - planar_seed("E0", 0.1).rho_angle(a))) < 1e-14
    K = perturbation_body(sphere_function("P2"), 0.05, 1.0)
    assert convexity_check(K)
    with pytest.raises(ValueError):
        perturbation_body(zero, 0.1, 0.0)
    with pytest.raises(ValueError):
        perturbation_body(sphere_function("P2"), 3.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-4, 0.05))
def test_perturbation_converges_to_ball(eps):
    x = sample_sphere(3, 2000, 6)
    K = perturbation_body(sphere_function("P2"), eps, 1.0, check=False)
    # |P2| <= 1 on the sphere
    assert np.max(np.abs(K.rho(x) - 1)) <= 1.0 * eps + 1e-15


def test_convexity_check_examples():
    r = convexity_check(ball(3, 1))
    assert r.convex and abs(r.margin - 1) < 1e-9
    assert convexity_check(planar_seed("K0", 0.1))
    f = SphereFunction(2, lambda p: np.cos(2 * np.arctan2(p[:, 1], p[:, 0])), True, "cos2")
    bad = perturbation_body(f, 0.9, 1.0, check=False)
    rep = convexity_check(bad)
    assert not rep.convex
    # the failing direction sits near the flat side u = pi/2
    assert abs(abs(rep.direction[1]) - 1) < 0.05


def test_support_body_2d_convexity_margin():
    square = SupportBody2D(lambda t: np.abs(np.cos(t)) + np.abs(np.sin(t)), "square")
    assert square.convexity_margin() > -1e-8
    disk = SupportBody2D(lambda t: np.ones_like(t), "disk")
    assert abs(disk.convexity_margin() - 1) < 1e-12


def test_planar_seeds_equal_volume_and_distribution():
    g = quadrature_grid(2, 4096)
    for eps in (0.05, 0.1, 0.3):
        K0, E0 = planar_seed("K0", eps), planar_seed("E0", eps)
        assert abs(volume(K0, g) - volume(E0, g)) < 1e-8
        assert ks_distance(radial_distribution(K0, g), radial_distribution(E0, g)) < 1e-3


def test_harmonic_pair():
    H2, F = equal_distributed_harmonic_pair(0.5)
    g = fine_grid(3, 64)
    h, f = H2(g.nodes), F(g.nodes)
    assert abs(g.integrate(h)) < 1e-10
    assert abs(g.integrate(f)) < 1e-10
    assert abs(g.integrate(h**2) - g.integrate(f**2)) < 1e-8
    # the twist moves values around
    assert np.max(np.abs(h - f)) > 0.1
    x = sample_sphere(3, 1_000_000, 8)
    from scipy.stats import ks_2samp

    assert ks_2samp(H2(x), F(x)).statistic < 2e-3


def test_twist_preserves_radial_distribution():
    E = ellipsoid([1.0, 1.2, 0.9])
    T = twisted(E, 0.7)
    g = fine_grid(3, 96)
    for p in (1, 2, 3, 6):
        assert abs(g.integrate(E.rho(g.nodes) ** p) - g.integrate(T.rho(g.nodes) ** p)) < 1e-9
    a = radial_distribution(E, samples=100_000, seed=12)
    b = radial_distribution(T, samples=100_000, seed=12)
    # same points, rearranged values: the mismatch is sampling noise only
    assert ks_distance(a, b) < 0.01


def test_scaled_and_rotated():
    x = sample_sphere(3, 200, 9)
    E = ellipsoid([1, 2, 3])
    assert np.allclose(scaled(E, 2).rho(x), 2 * E.rho(x))
    c, s = math.cos(0.3), math.sin(0.3)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    # rho_{RK}(x) = rho_K(R^T x)
    assert np.allclose(rotated(E, R).rho(x), E.rho(x @ R))


@pytest.mark.parametrize("K", [
    ball(3, 1.5),
    ellipsoid([1, 2, 0.5]),
    planar_seed("K0", 0.1),
    l2_sum(planar_seed("E0", 0.2), ball(1, 1)),
    polar_2d(planar_seed("E0", 0.2)),
    perturbation_body(sphere_function("P2"), 0.05, 1.0),
    perturbation_body(sphere_function("trig:0.3:0.1"), 0.05, -0.5),
    twisted(ellipsoid([1, 1.3, 0.8]), 0.5),
], ids=lambda K: K.spec)
def test_parse_round_trip(K):
    back = parse_body(K.spec)
    assert back.spec == K.spec
    x = sample_sphere(K.n, 300, 10)
    assert np.allclose(back.rho(x), K.rho(x), rtol=1e-12, atol=0)


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_body("nosuch n=3")
    with pytest.raises(ValueError):
        parse_body("l2sum(ball n=2 r=1.0, ball n=1 r=1.0")
