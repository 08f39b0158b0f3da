import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfwave.analysis import homogeneous_norm, phi_from_psi, psi_from_phi
from surfwave.kernels import lambda_canonical, s_kernel
from surfwave.solver import (Formulation, SolverConfig, SpatialVariant, StepSizeUnderflow, StopReason, evolve,
                             rhs_noncanonical, rhs_spatial, rhs_spectral_convolution, run, stable_dt, step,
                             thread_count)
from surfwave.spectral import AmplitudeState, SpectralGrid, hermitian_defect, random_bandlimited, single_mode
from surfwave.verify import all_rhs

seeds = st.integers(0, 2**32 - 1)


def brute_rhs(c, grid):
    """Direct double loop over the truncated canonical convolution."""
    n = grid.n_modes
    half = n // 2
    out = np.zeros(n, dtype=complex)
    for j in range(-half + 1, half):
        if j == 0:
            continue
        acc = 0
        for l in range(-half + 1, half):
            m = j - l
            if -half < m < half:
                acc += lambda_canonical(grid.dk * m, grid.dk * l) * c[m % n] * c[l % n]
        out[j % n] = -1j * np.sign(j) * acc
    return out


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt_safety=0)
    with pytest.raises(ValueError):
        SolverConfig(dt_safety=1.5)
    with pytest.raises(ValueError):
        SolverConfig(t_end=-1)
    assert Formulation.parse("spatial-hilbert") is Formulation.SPATIAL_HILBERT
    with pytest.raises(ValueError):
        Formulation.parse("nope")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("SURFWAVE_THREADS", "1")
    assert thread_count() == 1
    monkeypatch.setenv("SURFWAVE_THREADS", "x")
    with pytest.raises(ValueError):
        thread_count()


@pytest.mark.parametrize("length", [2 * np.pi, 3.7])
def test_convolution_matches_brute_force(length, rng):
    g = SpectralGrid(16, length)
    s = random_bandlimited(g, rng, band=7)
    np.testing.assert_allclose(rhs_spectral_convolution(s, g).coeffs, brute_rhs(s.coeffs, g), atol=1e-13)


def test_zero_state_rhs(grid64):
    z = AmplitudeState(np.zeros(64))
    for rate in all_rhs(z, grid64).values():
        assert not np.any(rate)


def test_single_pair_hand_sum():
    g = SpectralGrid(32)
    k0 = 2
    c = 0.3 - 0.4j
    s = single_mode(g, k0, c)
    rate = rhs_spectral_convolution(s, g).coeffs
    # only +-2 k0 receive energy; the k = 0 output is held at zero
    assert rate[2 * k0] == pytest.approx(-1j * lambda_canonical(k0, k0) * c * c)
    assert lambda_canonical(k0, k0) == pytest.approx(k0 ** 2)
    others = np.delete(rate, [2 * k0, -2 * k0])
    assert np.max(np.abs(others)) < 1e-15
    psi = psi_from_phi(s, g)
    prate = rhs_noncanonical(psi, g).coeffs
    assert prate[2 * k0] == pytest.approx(-1j * 2 * k0 * s_kernel(k0, k0) * psi.coeffs[k0] ** 2)
    np.testing.assert_allclose(rhs_spatial(s, g).coeffs, rate, atol=1e-14)


@given(seeds, st.sampled_from([32, 64]), st.sampled_from([2 * np.pi, 3.7]))
@settings(max_examples=25)
def test_formulations_agree(seed, n, length):
    g = SpectralGrid(n, length)
    s = random_bandlimited(g, np.random.default_rng(seed))
    rates = all_rhs(s, g)
    ref = rates[Formulation.SPECTRAL_CONVOLUTION.value]
    scale = np.max(np.abs(ref))
    for name, rate in rates.items():
        assert np.max(np.abs(rate - ref)) <= 1e-10 * scale, name
        assert hermitian_defect(rate) <= 1e-12 * scale


@given(seeds)
@settings(max_examples=20)
def test_spatial_variants_agree(seed):
    g = SpectralGrid(64)
    s = random_bandlimited(g, np.random.default_rng(seed))
    a = rhs_spatial(s, g, SpatialVariant.HILBERT_SQUARE).coeffs
    b = rhs_spatial(s, g, SpatialVariant.COMMUTATOR).coeffs
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))


def test_zero_state_step_unchanged(grid64):
    z = AmplitudeState(np.zeros(64))
    for dt in (1e-3, 0.5):
        assert not np.any(step(z, SolverConfig(), grid64, dt).coeffs)


def test_step_underflow(grid64):
    s = single_mode(grid64, 1, 0.5)
    with pytest.raises(StepSizeUnderflow):
        step(s, SolverConfig(), grid64, dt=1e-15)


def test_stable_dt_formula(grid64):
    s = single_mode(grid64, 1, 0.5)
    assert stable_dt(s, grid64, 0.5) == pytest.approx(0.5 / (1.0 * 32 ** 2 + 1e-12))


def test_per_step_conservation():
    g = SpectralGrid(64)
    s = single_mode(g, 1, 0.05)
    norm0 = homogeneous_norm(psi_from_phi(s, g), 0, g)
    cfg = SolverConfig()
    for _ in range(20):
        new = step(s, cfg, g)
        norm = homogeneous_norm(psi_from_phi(new, g), 0, g)
        assert abs(norm - norm0) / norm0 < 1e-12
        s = new


def test_mean_is_frozen():
    g = SpectralGrid(32)
    s = random_bandlimited(g, np.random.default_rng(0), band=5, mean=0.7).scaled(0.3)
    out = evolve(s, g, 0.01)
    assert out.coeffs[0] == s.coeffs[0]


def test_noncanonical_change_of_variables():
    g = SpectralGrid(64)
    s = random_bandlimited(g, np.random.default_rng(2), band=6, slope=2).scaled(0.2)
    a = evolve(s, g, 0.02, Formulation.SPATIAL_HILBERT)
    b = evolve(s, g, 0.02, Formulation.NONCANONICAL)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-8
    back = phi_from_psi(psi_from_phi(s, g), g, mean=s.coeffs[0].real)
    np.testing.assert_allclose(back.coeffs, s.coeffs, atol=1e-15)


def test_amplitude_scaling():
    g = SpectralGrid(32)
    s = random_bandlimited(g, np.random.default_rng(3), band=4, slope=2).scaled(0.2)
    tau, alpha = 0.05, 2.0
    lhs = evolve(s.scaled(alpha), g, tau).coeffs
    rhs = alpha * evolve(s, g, alpha * tau).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_half_period_translation():
    g = SpectralGrid(64)
    s = random_bandlimited(g, np.random.default_rng(4), band=6, slope=2).scaled(0.2)
    flip = (-1.0) ** g.j
    shifted = AmplitudeState(s.coeffs * flip)
    a = evolve(shifted, g, 0.05).coeffs
    b = evolve(s, g, 0.05).coeffs * flip
    assert np.max(np.abs(a - b)) < 1e-10


def test_run_zero_time():
    g = SpectralGrid(32)
    rec = run(single_mode(g, 1, 0.5), SolverConfig(t_end=0.0), g)
    assert rec.steps == 0 and len(rec.diagnostics) == 1 and rec.stop_reason is StopReason.T_END
    assert len(rec.snapshots) == 1


def test_run_streams_and_lands_on_snapshots():
    g = SpectralGrid(32)
    seen = []
    rec = run(single_mode(g, 1, 0.5), SolverConfig(t_end=0.1, diag_every=5), g, seen.append, snapshot_every=0.03)
    taus = [t for t, _ in rec.snapshots]
    np.testing.assert_allclose(taus, [0.0, 0.03, 0.06, 0.09, 0.1], atol=1e-12)
    assert seen[-1]["event"] == "stop" and seen[-1]["reason"] == "t_end"
    integrals = [d.blowup_integral for d in rec.diagnostics]
    assert all(b >= a for a, b in zip(integrals, integrals[1:]))
    assert rec.final_state.tau == pytest.approx(0.1)


def test_gradient_stop():
    g = SpectralGrid(64)
    rec = run(single_mode(g, 1, 0.5), SolverConfig(t_end=2.0, gradient_factor=3.0, diag_every=1000), g)
    assert rec.stop_reason is StopReason.BLOWUP_GRADIENT
    assert rec.diagnostics[-1].sup_phi_x > 3.0


def test_max_steps_stop():
    g = SpectralGrid(32)
    rec = run(single_mode(g, 1, 0.5), SolverConfig(t_end=1.0, max_steps=3), g)
    assert rec.stop_reason is StopReason.MAX_STEPS and rec.steps == 3
    assert math.isfinite(rec.blowup_integral)
