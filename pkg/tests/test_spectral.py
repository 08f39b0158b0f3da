import numpy as np
import pytest
from hypothesis import given, strategies as st

from surfwave.spectral import (AmplitudeState, SpectralGrid, SymmetryError, check_hermitian, dealiased_product,
                               derivative, hilbert, l2_coefficient_norm, random_bandlimited, single_mode,
                               to_physical, to_spectral)

seeds = st.integers(0, 2**32 - 1)
sizes = st.sampled_from([16, 32, 64, 128])
lengths = st.sampled_from([2 * np.pi, 3.7, 10.0])


def brute_product(a, b, n):
    """Truncated convolution sum over the retained band."""
    half = n // 2
    out = np.zeros(n, dtype=complex)
    for j in range(-half + 1, half):
        for l in range(-half + 1, half):
            m = j - l
            if -half < m < half:
                out[j % n] += a[m % n] * b[l % n]
    return out


def test_grid_validation():
    with pytest.raises(ValueError):
        SpectralGrid(24)
    with pytest.raises(ValueError):
        SpectralGrid(8)
    with pytest.raises(ValueError):
        SpectralGrid(32, -1.0)


def test_grid_wavenumbers():
    g = SpectralGrid(16, 4 * np.pi)
    assert g.dk == pytest.approx(0.5)
    assert g.k_max == pytest.approx(4.0)
    assert g.j[1] == 1 and g.j[-1] == -1


def test_nyquist_zeroed_on_construction():
    c = np.ones(16, dtype=complex)
    assert AmplitudeState(c).coeffs[8] == 0


def test_unit_cosine_to_physical():
    g = SpectralGrid(32)
    vals = to_physical(single_mode(g, 1, 1.0), g)
    np.testing.assert_allclose(vals, 2 * np.cos(g.theta), atol=1e-14)


def test_zero_state_maps_to_zero(grid64):
    assert not np.any(to_physical(AmplitudeState(np.zeros(64)), grid64))


@given(seeds, sizes, lengths)
def test_round_trip(seed, n, length):
    g = SpectralGrid(n, length)
    s = random_bandlimited(g, np.random.default_rng(seed), band=n // 2 - 1, mean=0.3)
    back = to_spectral(to_physical(s, g), g)
    assert np.max(np.abs(back.coeffs - s.coeffs)) <= 1e-13 * np.max(np.abs(s.coeffs))


@given(seeds, sizes)
def test_parseval(seed, n):
    g = SpectralGrid(n)
    s = random_bandlimited(g, np.random.default_rng(seed))
    vals = to_physical(s, g)
    assert np.sqrt(np.mean(vals ** 2)) == pytest.approx(l2_coefficient_norm(s), rel=1e-12)


def test_symmetry_violation_is_an_error(grid64):
    c = np.zeros(64, dtype=complex)
    c[3] = 1.0
    with pytest.raises(SymmetryError):
        to_physical(AmplitudeState(c), grid64)
    with pytest.raises(SymmetryError):
        check_hermitian(AmplitudeState(c))


def test_hilbert_of_cosine_is_sine():
    g = SpectralGrid(32)
    h = to_physical(hilbert(single_mode(g, 1, 0.5), g), g)
    np.testing.assert_allclose(h, np.sin(g.theta), atol=1e-14)


def test_hilbert_of_constant_is_zero(grid64):
    c = np.zeros(64, dtype=complex)
    c[0] = 2.5
    assert not np.any(hilbert(AmplitudeState(c), grid64).coeffs)


@given(seeds, sizes)
def test_hilbert_squared_removes_mean(seed, n):
    g = SpectralGrid(n)
    s = random_bandlimited(g, np.random.default_rng(seed), band=n // 2 - 1, mean=1.5)
    hh = hilbert(hilbert(s, g), g).coeffs
    expected = -s.coeffs.copy()
    expected[0] = 0
    assert np.max(np.abs(hh - expected)) <= 1e-13 * np.max(np.abs(s.coeffs))


def test_derivative_of_sine_is_cosine():
    g = SpectralGrid(32)
    d = to_physical(derivative(single_mode(g, 1, -0.5j), g, 1), g)
    np.testing.assert_allclose(d, np.cos(g.theta), atol=1e-14)


def test_second_derivative_factor():
    g = SpectralGrid(32, 3.0)
    s = single_mode(g, 3, 0.7 + 0.2j)
    d2 = derivative(s, g, 2)
    np.testing.assert_allclose(d2.coeffs[3], -(g.k[3] ** 2) * s.coeffs[3])


def test_derivative_order_checked(grid64):
    with pytest.raises(ValueError):
        derivative(AmplitudeState(np.zeros(64)), grid64, 3)


def test_derivative_against_finite_differences(rng):
    g = SpectralGrid(4096)
    s = random_bandlimited(g, rng, band=8, slope=2.0)
    vals = to_physical(s, g)
    h = g.length / g.n_modes
    # fourth-order centered stencil
    fd = (8 * (np.roll(vals, -1) - np.roll(vals, 1)) - (np.roll(vals, -2) - np.roll(vals, 2))) / (12 * h)
    exact = to_physical(derivative(s, g, 1), g)
    assert np.max(np.abs(fd - exact)) / np.max(np.abs(exact)) < 1e-6


def test_cosine_squared_exact():
    g = SpectralGrid(16)
    c = single_mode(g, 1, 0.5)
    p = to_physical(dealiased_product(c, c, g), g)
    np.testing.assert_allclose(p, 0.5 * (1 + np.cos(2 * g.theta)), atol=1e-15)


def test_product_with_zero(grid64, rng):
    a = random_bandlimited(grid64, rng)
    assert not np.any(dealiased_product(a, AmplitudeState(np.zeros(64)), grid64).coeffs)


@given(seeds, st.sampled_from([16, 32]), lengths)
def test_product_matches_convolution_sum(seed, n, length):
    g = SpectralGrid(n, length)
    rng = np.random.default_rng(seed)
    a = random_bandlimited(g, rng, band=n // 2 - 1)
    b = random_bandlimited(g, rng, band=n // 2 - 1)
    got = dealiased_product(a, b, g).coeffs
    want = brute_product(a.coeffs, b.coeffs, n)
    assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


@given(seeds, sizes)
def test_product_commutative_and_bilinear(seed, n):
    g = SpectralGrid(n)
    rng = np.random.default_rng(seed)
    a, b, c = (random_bandlimited(g, rng) for _ in range(3))
    ab = dealiased_product(a, b, g).coeffs
    np.testing.assert_allclose(ab, dealiased_product(b, a, g).coeffs, atol=1e-14)
    lhs = dealiased_product(AmplitudeState(2 * a.coeffs + c.coeffs), b, g).coeffs
    rhs = 2 * ab + dealiased_product(c, b, g).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-13 * np.max(np.abs(rhs))


def test_product_exact_for_band_third():
    g = SpectralGrid(48 * 0 + 64)
    rng = np.random.default_rng(1)
    a = random_bandlimited(g, rng, band=g.n_modes // 3)
    b = random_bandlimited(g, rng, band=g.n_modes // 3)
    direct = to_spectral(to_physical(a, g) * to_physical(b, g), g).coeffs
    # inputs within N/3: aliasing only touches modes beyond the kept band
    keep = np.abs(g.j) < g.n_modes // 2 - g.n_modes // 3
    np.testing.assert_allclose(dealiased_product(a, b, g).coeffs[keep], direct[keep], atol=1e-13)
