import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import eval_legendre

from geomtomo.bodies import (
    ball,
    ellipsoid,
    l2_sum,
    perturbation_body,
    planar_seed,
    sphere_function,
)
from geomtomo.functionals import frac_derivative, section_areas
from geomtomo.harmonics import (
    HarmonicExpansion,
    body_from_polar_projection_body,
    cosine_eigenvalue,
    expand,
    fourier_multiplier,
    frac_derivative_fourier,
    intersection_body,
    invert_intersection_body,
    multiplier_monotonicity_report,
    paper_multiplier,
    parseval_check,
    projection_support_expansion,
    radon_eigenvalue,
    radon_transform,
    radon_via_multipliers,
)
from geomtomo.sphere import fine_grid, quadrature_grid, rng, sample_sphere


def _random_even_expansion(seed, L=8):
    g = rng(seed, "coeffs").standard_normal((L + 1, 2 * L + 1))
    co = np.zeros_like(g)
    for m in range(0, L + 1, 2):
        co[m, L - m : L + m + 1] = g[m, L - m : L + m + 1] / (1 + m) ** 2
    return HarmonicExpansion(3, L, co)


def test_expand_examples():
    e = expand(sphere_function("P2"), 8, n=3)
    norms = e.degree_norms()
    assert norms[2] > 0.1
    assert np.max(np.delete(norms, 2)) < 1e-13
    one = expand(lambda p: np.ones(p.shape[0]), 8, n=3)
    assert abs(one.mean() - 1) < 1e-14
    assert np.max(one.degree_norms()[1:]) < 1e-13


def test_expand_planar_decay():
    e = expand(planar_seed("E0", 0.1).rho, 40, n=2)
    norms = e.degree_norms()
    assert np.max(norms[1::2]) < 1e-14
    assert np.max(norms[32:]) < 1e-10


def test_expand_round_trip_and_csv():
    f = perturbation_body(sphere_function("P2"), 0.05, 1.0).rho
    e = expand(f, 12, n=3)
    x = sample_sphere(3, 200, 1)
    assert np.max(np.abs(e.evaluate(x) - f(x))) < 1e-12
    back = HarmonicExpansion.from_csv(e.to_csv())
    assert np.array_equal(back.coeffs, e.coeffs)


def test_expand_rejects_coarse_grid():
    with pytest.raises(ValueError, match="too coarse"):
        expand(sphere_function("P2"), 16, quadrature_grid(3, 8))
    with pytest.raises(ValueError):
        expand(lambda p: p[:, 0] ** 2, 4)


def test_on_grid_matches_evaluate():
    e = _random_even_expansion(3)
    g = fine_grid(3, 12)
    assert np.max(np.abs(e.on_grid(g) - e.evaluate(g.nodes))) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_orthonormal_basis(seed):
    # the mean square of an expansion is the sum of squared coefficients
    e = _random_even_expansion(seed)
    g = fine_grid(3, 12)
    assert abs(g.integrate(e.on_grid(g) ** 2) - np.sum(e.coeffs**2)) < 1e-12


def test_fourier_multiplier_examples():
    assert abs(fourier_multiplier(3, 0, 0) - 4 * math.pi) < 1e-12
    assert abs(fourier_multiplier(3, 1, 0) - 2 * math.pi**2) < 1e-12
    mags = [abs(fourier_multiplier(3, 0.5, m)) for m in range(0, 21, 2)]
    assert np.ptp(mags) < 1e-12 * max(mags)
    with pytest.raises(ValueError):
        fourier_multiplier(3, 0.5, 3)
    with pytest.raises(ValueError):
        fourier_multiplier(3, 2.5, 2)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 1.9), st.integers(0, 10))
def test_multiplier_signs_and_paper_factor(q, k):
    m = 2 * k
    lam = fourier_multiplier(3, q, m)
    assert np.sign(lam) == (-1) ** k
    assert abs(paper_multiplier(3, q, m) / lam - 2**q) < 1e-12


def test_monotonicity_report_examples():
    rows, verdict = multiplier_monotonicity_report(3, 0.0, 20)
    assert verdict == "lambda_2 smallest"
    assert rows[0][0] == 2
    _, verdict = multiplier_monotonicity_report(4, 1.0, 20)
    assert verdict == "constant"
    rows, _ = multiplier_monotonicity_report(3, 1.5, 4)
    assert rows[0][1] > rows[1][1]


def test_radon_examples():
    e3 = np.array([0.0, 0.0, 1.0])
    one = radon_transform(lambda p: np.ones(p.shape[0]), e3)
    assert abs(one[0] - 2 * math.pi) < 1e-12
    p2 = radon_transform(sphere_function("P2"), e3)
    assert abs(p2[0] + math.pi) < 1e-12


def test_radon_direct_vs_multipliers():
    f = lambda p: 1 + 0.3 * (1.5 * p[:, 2] ** 2 - 0.5)
    e = expand(f, 16, n=3)
    thetas = sample_sphere(3, 200, 5)
    direct = radon_transform(f, thetas)
    spectral = radon_via_multipliers(e).evaluate(thetas)
    assert np.max(np.abs(direct - spectral)) < 1e-6


def test_radon_rejects_odd_content():
    e = expand(lambda p: p[:, 0], 4, n=3)
    with pytest.raises(ValueError, match="odd"):
        radon_via_multipliers(e)


@pytest.mark.parametrize("m", range(0, 17, 2))
def test_radon_eigenvalues_against_quadrature(m):
    zonal = lambda p: eval_legendre(m, p[:, 2])
    pole = radon_transform(zonal, np.array([0.0, 0.0, 1.0]), resolution=256)[0]
    assert abs(pole / eval_legendre(m, 1.0) - radon_eigenvalue(m)) < 1e-8
    assert abs(radon_eigenvalue(m) - 2 * math.pi * eval_legendre(m, 0.0)) < 1e-12


@pytest.mark.parametrize("m", range(0, 13, 2))
def test_cosine_eigenvalues(m):
    exact, _ = integrate.quad(lambda t: abs(t) * eval_legendre(m, t), -1, 1, points=[0.0])
    assert abs(cosine_eigenvalue(m) - 2 * math.pi * exact) < 1e-12
    assert cosine_eigenvalue(m + 1) == 0.0


def test_cosine_eigenvalue_values():
    assert abs(cosine_eigenvalue(0) - 2 * math.pi) < 1e-14
    assert abs(cosine_eigenvalue(2) - math.pi / 2) < 1e-14


def test_parseval_at_equal_magnitudes():
    e = _random_even_expansion(7, L=12)
    lhs, rhs = parseval_check(e, 0.5)
    assert abs(lhs - rhs) < 1e-12 * rhs
    lhs, rhs = parseval_check(e, 0.2)
    assert abs(lhs - rhs) > 1e-6 * rhs


def test_intersection_body_examples():
    x = sample_sphere(3, 50, 2)
    assert np.allclose(intersection_body(ball(3, 1)).rho(x), math.pi, atol=1e-12)
    E = ellipsoid([1, 1, 2])
    assert abs(intersection_body(E).rho(np.array([[0.0, 0.0, 1.0]]))[0] - math.pi) < 1e-10
    # planar: I(K) is K rotated by pi/2 and scaled by 2
    K0 = planar_seed("K0", 0.1)
    a = np.linspace(0, 2 * math.pi, 33)
    IK = intersection_body(K0)
    assert np.max(np.abs(IK.rho_angle(a) - 2 * K0.rho_angle(a + math.pi / 2))) < 1e-12


def test_invert_ball():
    K = invert_intersection_body(ball(3, math.pi), 8)
    x = sample_sphere(3, 100, 3)
    assert np.max(np.abs(K.rho(x) - 1)) < 1e-12


def test_invert_perturbed_target_round_trip():
    H2 = sphere_function("H2")
    target = lambda p: 1 + 0.05 * H2(p)
    K = invert_intersection_body(target, 24)
    x = sample_sphere(3, 300, 4)
    back = section_areas(K, x, 512)
    assert np.max(np.abs(back - target(x))) < 1e-4


def test_invert_intersection_of_perturbation_body():
    K = perturbation_body(sphere_function("P2"), 0.1, 1.0)
    IK = intersection_body(K)
    K2 = invert_intersection_body(IK, 24)
    x = sample_sphere(3, 200, 6)
    assert np.max(np.abs(K2.rho(x) - K.rho(x))) < 1e-3


def test_invert_l2_target_sections():
    eps = 0.1
    target = l2_sum(planar_seed("K0", eps), ball(1, 1))
    K = invert_intersection_body(target, 24)
    x = sample_sphere(3, 200, 7)
    # radial direct route, independent of the multiplier inversion
    assert np.max(np.abs(section_areas(K, x, 512) - target.rho(x))) < 2e-3


def test_invert_rejects_nonpositive():
    # positive target, but inverting the Radon multipliers amplifies degree 8
    # by |P_0(0) / P_8(0)| ~ 3.7 and rho^2 goes negative
    target = lambda p: 1 + 0.9 * eval_legendre(8, p[:, 2])
    with pytest.raises(ValueError, match="not the intersection body"):
        invert_intersection_body(target, 16)


def test_projection_route_on_ball():
    from geomtomo.bodies import SupportBody

    h = expand(lambda p: np.ones(p.shape[0]), 8, n=3)
    B = SupportBody(h, "ball-support")
    hp = projection_support_expansion(B)
    x = sample_sphere(3, 20, 8)
    assert np.max(np.abs(hp.evaluate(x) - math.pi)) < 1e-10
    K = body_from_polar_projection_body(lambda p: np.full(p.shape[0], 1 / math.pi), 8)
    assert np.max(np.abs(K.rho(x) - 1)) < 1e-8


def test_frac_derivative_routes_agree_on_ball():
    e3 = np.array([[0.0, 0.0, 1.0]])
    for q in (-0.5, -0.2, 0.4):
        f = frac_derivative_fourier(ball(3, 1), e3, q, L=8)[0]
        d = frac_derivative(ball(3, 1), e3[0], q)
        assert abs(f - d) < 1e-3
    assert abs(frac_derivative_fourier(ball(3, 1), e3, -0.5, L=8)[0] - 1.6 * math.sqrt(math.pi)) < 1e-10


def test_frac_derivative_routes_agree_on_ellipsoid():
    E = ellipsoid([1.0, 1.2, 0.9])
    thetas = sample_sphere(3, 3, 9)
    f = frac_derivative_fourier(E, thetas, -0.5, L=32)
    d = np.array([frac_derivative(E, t, -0.5) for t in thetas])
    assert np.max(np.abs(f - d)) < 1e-3
