"""Self-check suites run by ``surfwave verify`` and the acceptance tests.

Each suite returns :class:`~surfwave.kernels.IdentityResult` rows so the CLI
can print one TSV line per check.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .analysis import (cyclic_triple_sum, interpolation_check, psi_from_phi, validate_interpolation_constant)
from .kernels import IdentityResult
from .solver import (Formulation, SolverConfig, SpatialVariant, rhs_noncanonical, rhs_spatial,
                     rhs_spectral_convolution, run)
from .spectral import AmplitudeState, SpectralGrid, random_bandlimited

INTERPOLATION_PAIRS = ((1.0, -1.5), (2.0, 0.0), (0.75, 0.25))


def kernel_suite(n_points: int = 100_000, sigmas=(0.1, 0.5, 1.0), seed: int = 0) -> list[IdentityResult]:
    return kernels.kernel_identities(n_points, seed=seed, sigmas=sigmas)


def symmetrization_suite(sigma: float = 0.5, seed: int = 0, n_profiles: int = 20,
                         n_k: int = 64) -> list[IdentityResult]:
    return kernels.symmetrization_check(n_profiles=n_profiles, n_k=n_k, sigma=sigma, seed=seed)


def phi_rate_from_psi_rate(psi_rate: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    absk = np.abs(grid.k)
    return np.where(absk > 0, psi_rate / np.sqrt(np.where(absk > 0, absk, 1.0)), 0.0)


def all_rhs(state: AmplitudeState, grid: SpectralGrid) -> dict[str, np.ndarray]:
    """``d phi_hat / d tau`` from every formulation."""
    psi_rate = rhs_noncanonical(psi_from_phi(state, grid), grid).coeffs
    return {
        Formulation.SPECTRAL_CONVOLUTION.value: rhs_spectral_convolution(state, grid).coeffs,
        Formulation.SPATIAL_HILBERT.value: rhs_spatial(state, grid, SpatialVariant.HILBERT_SQUARE).coeffs,
        Formulation.SPATIAL_COMMUTATOR.value: rhs_spatial(state, grid, SpatialVariant.COMMUTATOR).coeffs,
        Formulation.NONCANONICAL.value: phi_rate_from_psi_rate(psi_rate, grid),
    }


def cross_formulation_suite(n_states: int = 20, n_modes: int = 64, seed: int = 0,
                            tol: float = 1e-10) -> list[IdentityResult]:
    """All right-hand sides agree, relative to the largest coefficient of the reference."""
    grid = SpectralGrid(n_modes)
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(n_states):
        rates = all_rhs(random_bandlimited(grid, rng), grid)
        ref = rates[Formulation.SPECTRAL_CONVOLUTION.value]
        scale = np.max(np.abs(ref))
        for name, rate in rates.items():
            if name != Formulation.SPECTRAL_CONVOLUTION.value:
                err = float(np.max(np.abs(rate - ref)) / scale)
                worst[name] = max(worst.get(name, 0.0), err)
    return [IdentityResult(f"rhs.{name}_vs_convolution", n_states, err, err <= tol) for name, err in worst.items()]


def conservation_suite(n_modes: int = 64, t_end: float = 0.05, seed: int = 0, tol: float = 1e-8,
                       n_states: int = 20) -> list[IdentityResult]:
    """Drift of the conserved norm over short runs, plus the discrete cyclic cancellation."""
    grid = SpectralGrid(n_modes)
    rng = np.random.default_rng(seed)
    state = random_bandlimited(grid, rng, band=8, slope=2.0).scaled(0.2)
    rows = []
    for form in Formulation:
        rec = run(state, SolverConfig(formulation=form, t_end=t_end, diag_every=1000), grid)
        rows.append(IdentityResult(f"conservation.{form.value}", rec.steps, rec.max_drift, rec.max_drift <= tol))
    worst = 0.0
    for _ in range(n_states):
        total, scale = cyclic_triple_sum(psi_from_phi(random_bandlimited(grid, rng), grid), grid)
        worst = max(worst, total / scale)
    rows.append(IdentityResult("conservation.cyclic_sum", n_states, worst, worst <= 1e-10))
    return rows


def interpolation_suite(n_states: int = 100, n_modes: int = 128, seed: int = 0,
                        pairs=INTERPOLATION_PAIRS) -> list[IdentityResult]:
    """Closed-form constants against numerics, then the inequality on random states.

    For the inequality rows the reported error is the worst ratio lhs/rhs,
    which must not exceed 1.
    """
    grid = SpectralGrid(n_modes)
    rng = np.random.default_rng(seed)
    rows = []
    for p, q in pairs:
        check = validate_interpolation_constant(p, q)
        err = max(check.equalizer_rel_err, check.sharp_rel_err)
        rows.append(IdentityResult(f"interpolation.constant(p={p:g},q={q:g})", 2, err, err <= 1e-8))
    states = [psi_from_phi(random_bandlimited(grid, rng, band=int(rng.integers(1, grid.n_modes // 2)),
                                              slope=float(rng.uniform(0.0, 3.0))), grid)
              for _ in range(n_states)]
    for p, q in pairs:
        results = [interpolation_check(s, p, q, grid) for s in states]
        ratio = max(r.ratio for r in results)
        rows.append(IdentityResult(f"interpolation.inequality(p={p:g},q={q:g})", n_states, ratio,
                                   all(r.passed for r in results)))
    return rows


SUITES = {
    "kernels": kernel_suite,
    "symmetrization": symmetrization_suite,
    "cross_formulation": cross_formulation_suite,
    "conservation": conservation_suite,
    "interpolation": interpolation_suite,
}


def run_suites(names=None, **options) -> dict[str, list[IdentityResult]]:
    """Run the named suites (all by default); ``options[name]`` holds keyword arguments for a suite."""
    selected = list(SUITES) if names is None else list(names)
    return {name: SUITES[name](**options.get(name, {})) for name in selected}
