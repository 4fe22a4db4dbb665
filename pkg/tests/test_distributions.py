import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from geomtomo.bodies import ball, ellipsoid, l2_sum, planar_seed, rotated, scaled
from geomtomo.distributions import (
    EmpiricalCDF,
    dominates,
    k_section_distribution,
    ks_distance,
    moment_sequence,
    projection_distribution,
    radial_distribution,
    section_distribution,
)
from geomtomo.sphere import fine_grid, quadrature_grid, rng

values = arrays(np.float64, st.integers(1, 40), elements=st.floats(0.0, 10.0))


def _cdf(v):
    return EmpiricalCDF.from_values(v)


def test_empirical_cdf_invariants():
    F = EmpiricalCDF.from_values([3.0, 1.0, 2.0, 2.0], [0.1, 0.2, 0.3, 0.4])
    assert np.all(np.diff(F.samples) >= 0)
    assert abs(F.weights.sum() - 1) < 1e-12
    assert F.survival(-1e9) == 1.0
    assert F.survival(1e9) == 0.0
    # survival counts ties at t (>= convention), the strict version does not
    assert abs(F.survival(2.0) - 0.8) < 1e-15
    assert abs(F.survival_strict(2.0) - 0.1) < 1e-15
    with pytest.raises(ValueError):
        EmpiricalCDF.from_values([])
    with pytest.raises(ValueError):
        EmpiricalCDF.from_values([1.0, 2.0], [0.5, -0.5])


@settings(max_examples=60, deadline=None)
@given(values)
def test_survival_monotone_and_bounded(v):
    F = _cdf(v)
    t = np.linspace(-1, 11, 200)
    s = F.survival(t)
    assert np.all(np.diff(s) <= 1e-15)
    assert s[0] == 1.0 and s[-1] == 0.0


def test_csv_round_trip():
    F = radial_distribution(planar_seed("K0", 0.1), quadrature_grid(2, 64))
    G = EmpiricalCDF.from_csv(F.to_csv())
    assert np.array_equal(F.samples, G.samples)
    assert np.array_equal(F.weights, G.weights)
    assert G.meta == F.meta
    with pytest.raises(ValueError):
        EmpiricalCDF.from_csv("value,weight\n1,1\n")


def test_ks_examples():
    F = _cdf([1.0, 2.0, 3.0])
    assert ks_distance(F, F) == 0.0
    assert ks_distance(_cdf([1.0]), _cdf([2.0])) == 1.0
    g = quadrature_grid(2, 4096)
    a = radial_distribution(planar_seed("K0", 0.1), g)
    b = radial_distribution(planar_seed("E0", 0.1), g)
    assert ks_distance(a, b) < 1e-3


@settings(max_examples=60, deadline=None)
@given(values, values)
def test_ks_symmetric_and_bounded(u, v):
    F, G = _cdf(u), _cdf(v)
    d = ks_distance(F, G)
    assert 0.0 <= d <= 1.0
    assert d == ks_distance(G, F)


@settings(max_examples=60, deadline=None)
@given(values, values, values)
def test_ks_triangle_inequality(u, v, w):
    F, G, H = _cdf(u), _cdf(v), _cdf(w)
    assert ks_distance(F, H) <= ks_distance(F, G) + ks_distance(G, H) + 1e-12


def test_ks_ignores_roundoff_ties():
    x = np.linspace(1, 2, 101)
    assert ks_distance(_cdf(x), _cdf(x * (1 + 1e-15))) == 0.0


def test_dominates_examples():
    F = _cdf([1.0, 2.0, 3.0])
    assert dominates(F, F, 0.0)
    g = fine_grid(3, 12)
    small = section_distribution(ball(3, 0.9), g)
    big = section_distribution(ball(3, 1.0), g)
    assert dominates(small, big)
    assert not dominates(big, small)
    q = quadrature_grid(2, 4096)
    a = radial_distribution(planar_seed("K0", 0.1), q)
    b = radial_distribution(planar_seed("E0", 0.1), q)
    assert dominates(a, b, 1e-3) and dominates(b, a, 1e-3)


@settings(max_examples=60, deadline=None)
@given(values, st.floats(0.0, 2.0))
def test_dominates_shift(v, c):
    F = _cdf(v)
    # adding c >= 0 to every sample moves mass to the right
    assert dominates(F, _cdf(v + c))
    # shifts below the tie tolerance count as equality
    if c > 1e-9:
        assert not dominates(_cdf(v + c), F)


@settings(max_examples=60, deadline=None)
@given(values, values, values)
def test_dominance_partial_order(u, v, w):
    F, G, H = _cdf(u), _cdf(v), _cdf(w)
    assert dominates(F, F)
    if dominates(F, G) and dominates(G, H):
        assert dominates(F, H)
    if dominates(F, G) and dominates(G, F):
        assert ks_distance(F, G) <= 1e-12


def test_moment_sequence_examples():
    m = moment_sequence(_cdf([1.0]), 6, 1.0)
    assert np.allclose(m, 1 / (np.arange(7) + 1), atol=1e-15)
    F = _cdf([0.2, 0.5, 0.9])
    assert np.array_equal(moment_sequence(F, 8, 1.0), moment_sequence(_cdf([0.9, 0.5, 0.2]), 8, 1.0))
    q = quadrature_grid(2, 4096)
    a = radial_distribution(planar_seed("K0", 0.1), q)
    b = radial_distribution(planar_seed("E0", 0.1), q)
    assert np.max(np.abs(moment_sequence(a, 10, 1.0) - moment_sequence(b, 10, 1.0))) < 1e-6
    with pytest.raises(ValueError):
        moment_sequence(F, 3, 0.5)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(0.0, 1.0)))
def test_moment_sequence_matches_quadrature(v):
    F = _cdf(v)
    m = moment_sequence(F, 3, 1.0)
    # int_0^R t^m 1{x >= t} dt = x^{m+1}/(m+1), averaged
    for k in range(4):
        assert abs(m[k] - np.mean(v ** (k + 1)) / (k + 1)) < 1e-12


def test_ball_distributions_are_steps():
    g = fine_grid(3, 12)
    r = 1.3
    S = section_distribution(ball(3, r), g)
    assert S.support_width() < 1e-12
    assert abs(S.samples[0] - r**2 * math.pi) < 1e-12
    assert S.survival(r**2 * math.pi * (1 - 1e-9)) == 1.0
    assert S.survival(r**2 * math.pi * (1 + 1e-9)) == 0.0
    P = projection_distribution(ball(3, 1), g)
    assert abs(P.samples[0] - math.pi) < 1e-5 and P.support_width() < 1e-5


def test_section_distribution_planar_chords():
    q = quadrature_grid(2, 512)
    K0 = planar_seed("K0", 0.1)
    S = section_distribution(K0, q)
    R = radial_distribution(K0, q).scaled(2.0)
    assert ks_distance(S, R) < 1e-12


def test_projection_distribution_planar_polars():
    from geomtomo.bodies import polar_2d

    q = quadrature_grid(2, 4096)
    a = projection_distribution(polar_2d(planar_seed("K0", 0.2)), q)
    b = projection_distribution(polar_2d(planar_seed("E0", 0.2)), q)
    assert ks_distance(a, b) < 1e-3


def test_scaling_covariance():
    g = fine_grid(3, 24)
    K = ellipsoid([1.0, 1.3, 0.8])
    r = 1.7
    a = section_distribution(scaled(K, r), g)
    b = section_distribution(K, g).scaled(r**2)
    assert np.allclose(a.samples, b.samples, rtol=1e-12)


def test_rotation_invariance_of_sections():
    K = ellipsoid([1.0, 1.3, 0.8])
    q, _ = np.linalg.qr(rng(3, "rot").standard_normal((3, 3)))
    # a dense deterministic grid keeps both sides free of sampling noise
    g = fine_grid(3, 200, 400)
    a = section_distribution(K, g, resolution=128)
    b = section_distribution(rotated(K, q), g, resolution=128)
    assert ks_distance(a, b) < 2e-3


def test_k_sections_of_ball():
    F = k_section_distribution(ball(4, 1), 2, samples=2000, seed=1)
    assert F.support_width() < 1e-10
    assert abs(F.samples[0] - math.pi) < 1e-10
    with pytest.raises(ValueError):
        k_section_distribution(ball(4, 1), 4)
