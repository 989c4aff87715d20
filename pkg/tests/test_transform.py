import math

import numpy as np
import pytest
from numpy.polynomial import legendre

from spinbundle.errors import BandLimitExceeded, InvalidArgument
from spinbundle.harmonics import spin_ylm
from spinbundle.transform import (HarmonicCoefficients, SphereMap, analyze, inner_product, make_grid,
                                  real_coefficients, synthesize, synthesize_points,
                                  synthesize_real_field, synthesize_real_harmonics)


def random_coeffs(spin, lmax, rng):
    c = HarmonicCoefficients.zeros(spin, lmax)
    mask = c.mask()
    c.a[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
    return c


def test_grid_lmax_zero():
    g = make_grid(0)
    assert g.n_theta == 1 and g.n_phi >= 1
    assert math.cos(g.theta_nodes[0]) == pytest.approx(0, abs=1e-16)
    assert g.theta_weights[0] == 2.0


def test_grid_integrates_legendre_polynomials():
    g = make_grid(4)
    assert g.n_theta == 5
    x = np.cos(g.theta_nodes)
    for k in range(10):
        Pk = legendre.legval(x, [0] * k + [1])
        assert np.dot(g.theta_weights, Pk) == pytest.approx(2.0 if k == 0 else 0.0, abs=1e-14)


def test_grid_total_measure():
    for lmax in (0, 3, 17):
        assert make_grid(lmax).pixel_weights.sum() == pytest.approx(4 * math.pi, rel=1e-14)


def test_grid_rejects_too_few_longitudes():
    with pytest.raises(InvalidArgument):
        make_grid(4, n_phi=8)


def test_zero_and_monopole():
    g = make_grid(6)
    assert not np.any(synthesize(HarmonicCoefficients.zeros(0, 6), g).values)
    c = HarmonicCoefficients.zeros(0, 6)
    c[0, 0] = math.sqrt(4 * math.pi)
    np.testing.assert_allclose(synthesize(c, g).values, 1.0, atol=1e-14)
    a = analyze(SphereMap(g, 0, np.ones(g.shape)))
    expected = np.zeros_like(a.a)
    expected[0, 6] = math.sqrt(4 * math.pi)
    np.testing.assert_allclose(a.a, expected, atol=1e-14)


def test_single_coefficient_is_the_harmonic():
    g = make_grid(5)
    th, ph = g.points()
    for s, ell, m in [(0, 3, -2), (2, 4, 1), (-1, 5, 5)]:
        c = HarmonicCoefficients.zeros(s, 5)
        c[ell, m] = 1
        np.testing.assert_allclose(synthesize(c, g).values.ravel(), spin_ylm(s, ell, m, th, ph),
                                   atol=1e-14)


def test_analyze_sampled_harmonic():
    g = make_grid(6)
    th, ph = g.points()
    smap = SphereMap(g, 2, spin_ylm(2, 3, 1, th, ph).reshape(g.shape))
    a = analyze(smap)
    expected = np.zeros_like(a.a)
    expected[3, 1 + 6] = 1
    assert np.max(np.abs(a.a - expected)) < 1e-10


@pytest.mark.parametrize("spin", [-3, -2, -1, 0, 1, 2, 3])
@pytest.mark.parametrize("method", ["fft", "direct"])
def test_round_trip(spin, method):
    rng = np.random.default_rng(spin + 10)
    c = random_coeffs(spin, 24, rng)
    g = make_grid(24)
    back = analyze(synthesize(c, g, method), method=method, real=False)
    assert np.max(np.abs(back.a - c.a)) < 1e-10


def test_round_trip_large_band():
    rng = np.random.default_rng(5)
    c = random_coeffs(1, 64, rng)
    g = make_grid(64)
    assert np.max(np.abs(analyze(synthesize(c, g)).a - c.a)) < 1e-10


def test_fft_matches_direct_sum():
    rng = np.random.default_rng(1)
    c = random_coeffs(-2, 12, rng)
    g = make_grid(12, n_phi=30)
    np.testing.assert_allclose(synthesize(c, g, "fft").values, synthesize(c, g, "direct").values,
                               atol=1e-13)
    smap = synthesize(c, g)
    np.testing.assert_allclose(analyze(smap, method="fft").a, analyze(smap, method="direct").a,
                               atol=1e-13)


def test_parseval():
    rng = np.random.default_rng(2)
    for s in (0, 3):
        c = random_coeffs(s, 20, rng)
        m = synthesize(c, make_grid(20))
        assert inner_product(m, m).real == pytest.approx(np.sum(np.abs(c.a) ** 2), rel=1e-12)


def test_linearity():
    rng = np.random.default_rng(3)
    g = make_grid(10)
    x, y = random_coeffs(1, 10, rng), random_coeffs(1, 10, rng)
    alpha, beta = 0.3 - 1.2j, 2.5
    combo = HarmonicCoefficients(1, 10, alpha * x.a + beta * y.a)
    lhs = synthesize(combo, g).values
    rhs = alpha * synthesize(x, g).values + beta * synthesize(y, g).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    mx, my = synthesize(x, g), synthesize(y, g)
    both = analyze(SphereMap(g, 1, alpha * mx.values + beta * my.values))
    np.testing.assert_allclose(both.a, alpha * analyze(mx).a + beta * analyze(my).a, atol=1e-12)


def test_band_limit_enforced():
    with pytest.raises(BandLimitExceeded):
        synthesize(HarmonicCoefficients.zeros(0, 9), make_grid(8))
    with pytest.raises(BandLimitExceeded):
        analyze(SphereMap(make_grid(8), 0, np.zeros((9, 17))), lmax=9)


def test_coefficients_outside_mask_rejected():
    a = np.zeros((4, 7), dtype=complex)
    a[1, 0] = 1  # m = -3 at ell = 1
    with pytest.raises(InvalidArgument):
        HarmonicCoefficients(0, 3, a)
    a = np.zeros((4, 7), dtype=complex)
    a[1, 3] = 1  # ell = 1 < |s| = 2
    with pytest.raises(InvalidArgument):
        HarmonicCoefficients(2, 3, a)


def test_points_match_grid():
    rng = np.random.default_rng(4)
    c = random_coeffs(2, 7, rng)
    g = make_grid(7)
    th, ph = g.points()
    np.testing.assert_allclose(synthesize_points(c, th, ph), synthesize(c, g).values.ravel(), atol=1e-13)


def real_field_coeffs(lmax, rng):
    c = random_coeffs(0, lmax, rng)
    c.a[:, lmax] = c.a[:, lmax].real
    for m in range(1, lmax + 1):
        c.a[:, lmax - m] = (-1) ** m * np.conj(c.a[:, lmax + m])
    c.a[~c.mask()] = 0
    return c


def test_real_field_and_reality_mirror():
    rng = np.random.default_rng(6)
    g = make_grid(12)
    c = real_field_coeffs(12, rng)
    values = synthesize_real_field(c, g)
    assert values.dtype == float
    assert np.max(np.abs(synthesize(c, g).values.imag)) < 1e-12
    back = analyze(SphereMap(g, 0, values))
    assert back.satisfies_reality()
    assert np.max(np.abs(back.a - c.a)) < 1e-12
    bad = c.copy()
    bad[3, 2] += 1.0
    with pytest.raises(InvalidArgument):
        synthesize_real_field(bad, g)


def test_real_harmonic_synthesis_agrees():
    rng = np.random.default_rng(7)
    g = make_grid(10)
    c = real_field_coeffs(10, rng)
    np.testing.assert_allclose(synthesize_real_harmonics(real_coefficients(c), g),
                               synthesize_real_field(c, g), atol=1e-12)
