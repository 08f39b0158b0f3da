import numpy as np
import pytest
from hypothesis import given, strategies as st

from surfwave import kernels
from surfwave.kernels import (KernelContext, lambda0, lambda01, lambda02, lambda_alternate, lambda_canonical,
                              lambda_minus, lambda_plus, lambda_simpler, s_kernel, tilde_lambda01, tilde_lambda02,
                              tilde_lambda_sym)

reals = st.floats(-10, 10, allow_nan=False)
# dyadic points keep k + l exact, so shift identities are not polluted by input rounding
dyadic = st.integers(-4096, 4096).map(lambda m: m / 256.0)
sigmas = st.floats(0.01, 1.0)


def test_context_validation():
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            KernelContext(bad)


def test_origin_values():
    ctx = KernelContext(0.5)
    for fn in (lambda_plus, lambda_minus, lambda01, lambda02, tilde_lambda_sym, lambda_simpler):
        assert fn(0.0, 0.0, ctx) == 0.0
    assert lambda_canonical(0.0, 0.0) == 0.0
    assert s_kernel(0.0, 0.0) == 0.0


def test_canonical_examples():
    assert lambda_canonical(1, 1) == pytest.approx(1.0)
    assert lambda_canonical(1, -1) == 0.0
    assert lambda_canonical(2, 2) == pytest.approx(4.0)


def test_s_kernel_examples():
    assert s_kernel(1, 1) == pytest.approx(1 / np.sqrt(2))
    assert s_kernel(0, 5) == 0.0
    assert s_kernel(4, 4) == pytest.approx(np.sqrt(2))
    assert s_kernel(3, -3) == 0.0


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0])
def test_symmetrized_examples(sigma):
    ctx = KernelContext(sigma)
    assert tilde_lambda_sym(1, 1, ctx) == pytest.approx(-(1 + sigma))
    assert tilde_lambda_sym(1, -0.25, ctx) == pytest.approx((1 + sigma) * (-0.1875))
    assert tilde_lambda_sym(-1, -1, ctx) == pytest.approx(-(1 + sigma))


def test_plus_and_minus_pair_under_reality():
    ctx = KernelContext(1.0)
    # both carry a sgn(k) factor in front of an even kernel, so the partner flips sign
    assert lambda_minus(-2.0, -1.0, ctx) == pytest.approx(-lambda_plus(2.0, 1.0, ctx))
    rng = np.random.default_rng(0)
    k, l = rng.uniform(0.1, 3, 50), rng.uniform(-3, 3, 50)
    np.testing.assert_allclose(lambda_minus(-k, -l, ctx), -lambda_plus(k, l, ctx), atol=1e-12)
    assert np.isfinite(lambda_plus(3.0, 1.0, KernelContext(0.5)))
    assert np.isfinite(lambda_minus(-3.0, 1.0, KernelContext(0.5)))


def test_plus_cross_checked_against_shifted_pieces():
    ctx = KernelContext(1.0)
    shifted = tilde_lambda01(1.0, 1.0, ctx) + tilde_lambda02(1.0, 1.0, ctx)
    assert lambda_plus(2.0, 1.0, ctx) == pytest.approx(shifted, abs=1e-12)


def test_zero_k_pieces_defined():
    ctx = KernelContext(0.7)
    for l in (-2.0, 0.0, 3.0):
        assert np.isfinite(lambda01(0.0, l, ctx)) and np.isfinite(lambda02(0.0, l, ctx))
        assert lambda01(0.0, l, ctx) == 0.0


@given(reals, reals, sigmas)
def test_unified_kernel_matches_branches(k, l, sigma):
    ctx = KernelContext(sigma)
    scale = 1 + k * k + l * l
    if k > 0:
        assert abs(lambda0(k, l, ctx) - lambda_plus(k, l, ctx)) <= 1e-12 * scale
    elif k < 0:
        assert abs(lambda0(k, l, ctx) - lambda_minus(k, l, ctx)) <= 1e-12 * scale


@given(reals, reals, sigmas)
def test_shift_factorization(k, l, sigma):
    ctx = KernelContext(sigma)
    scale = 1 + k * k + l * l
    assert abs(lambda01(k, l, ctx) - np.sign(k) * tilde_lambda01(k - l, l, ctx)) <= 1e-12 * scale
    assert abs(lambda02(k, l, ctx) - np.sign(k) * tilde_lambda02(k - l, l, ctx)) <= 1e-12 * scale


@given(reals, reals, sigmas)
def test_three_forms_agree(k, l, sigma):
    ctx = KernelContext(sigma)
    scale = 1 + k * k + l * l
    closed = tilde_lambda_sym(k, l, ctx)
    assert abs(closed - lambda_simpler(k, l, ctx)) <= 1e-12 * scale
    assert abs(closed - lambda_alternate(k, l, ctx)) <= 1e-12 * scale
    assert abs(closed - kernels.tilde_lambda_sym_from_parts(k, l, ctx)) <= 1e-12 * scale


@given(dyadic, dyadic, st.sampled_from([0.5, 2.0, 10.0]))
def test_canonical_properties(k, l, alpha):
    scale = 1 + k * k + l * l
    lam = lambda_canonical(k, l)
    assert lam >= 0
    assert lam == pytest.approx(lambda_canonical(l, k), abs=1e-12 * scale)
    assert lam == pytest.approx(lambda_canonical(-k, -l), abs=1e-12 * scale)
    assert lambda_canonical(k + l, -l) == pytest.approx(lam, abs=1e-12 * scale)
    assert lambda_canonical(alpha * k, alpha * l) == pytest.approx(alpha ** 2 * lam, rel=1e-12, abs=1e-300)


@given(dyadic, dyadic, st.sampled_from([0.5, 2.0, 10.0]))
def test_s_kernel_properties(k, l, alpha):
    s = s_kernel(k, l)
    assert s == pytest.approx(s_kernel(l, k), abs=1e-12)
    assert s_kernel(k + l, -l) == pytest.approx(s, abs=1e-12 * (1 + abs(k) + abs(l)))
    assert s_kernel(alpha * k, alpha * l) == pytest.approx(np.sqrt(alpha) * s, rel=1e-12, abs=1e-300)
    bound = np.sqrt(min(abs(k + l), abs(k), abs(l)))
    assert s_kernel(k, l) <= bound * (1 + 1e-12) + 1e-300


@given(reals, reals)
def test_s_kernel_reduces_to_canonical(k, l):
    w = abs(k * l * (k + l))
    if w > 1e-6:
        assert s_kernel(k, l) == pytest.approx(lambda_canonical(k, l) / np.sqrt(w), rel=1e-12)


def test_identity_suite_small():
    rows = kernels.kernel_identities(2000, seed=3)
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]


def test_identity_suite_detects_broken_kernel():
    broken = lambda k, l: np.asarray(kernels.lambda_canonical(k, l)) + 1e-3 * np.asarray(k)  # noqa: E731
    rows = {r.name: r for r in kernels.kernel_identities(2000, canonical=broken)}
    assert not rows["Lambda.symmetry"].passed
    assert rows["S.symmetry"].passed


def test_quadrature_lattice_contains_kinks():
    nodes, h = kernels.quadrature_nodes(0.37, 1.0, 256)
    assert np.any(np.isclose(nodes, 0.0, atol=1e-15))
    assert np.any(np.isclose(nodes, 0.37, atol=1e-12))
    assert kernels.quadrature_nodes(2.5, 1.0)[0].size == 0


def test_symmetrization_small():
    rows = kernels.symmetrization_check(n_profiles=3, n_k=8, seed=4)
    assert all(r.passed for r in rows)


def test_symmetrization_detects_sign_flip(monkeypatch):
    original = kernels.lambda_plus
    monkeypatch.setattr(kernels, "lambda_plus", lambda k, l, ctx: -np.asarray(original(k, l, ctx)))
    rows = {r.name: r for r in kernels.symmetrization_check(n_profiles=2, n_k=8)}
    assert not rows["symmetrization.plus.sym"].passed
    assert rows["symmetrization.minus.sym"].passed
