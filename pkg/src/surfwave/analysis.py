"""Well-posedness and blow-up diagnostics in the noncanonical variable ``psi``.

``psi`` has Fourier samples ``|k|^{1/2} phi_hat(k)``.  All norms are Riemann
sums over the discrete spectrum with weight ``dk = 2 pi / L`` applied to the
continuum samples ``c_j / dk`` (see :mod:`surfwave.spectral`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .spectral import AmplitudeState, SpectralGrid


@dataclass(frozen=True)
class NormLadder:
    """Sobolev exponents tracked during a run and the blow-up criterion exponent."""

    s_values: tuple[float, ...] = (0.0, 2.5, 3.0)
    s_prime: float = 2.5

    def __post_init__(self):
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))
        if any(not math.isfinite(s) or s < 0 for s in self.s_values):
            raise ValueError(f"Sobolev exponents must be finite and >= 0, got {self.s_values}")
        if not self.s_prime > 2:
            raise ValueError(f"s_prime must exceed 2, got {self.s_prime}")


def psi_from_phi(phi: AmplitudeState, grid: SpectralGrid) -> AmplitudeState:
    return AmplitudeState(np.sqrt(np.abs(grid.k)) * phi.coeffs, phi.tau)


def phi_from_psi(psi: AmplitudeState, grid: SpectralGrid, mean: float = 0.0) -> AmplitudeState:
    absk = np.abs(grid.k)
    c = np.zeros_like(psi.coeffs)
    nz = absk > 0
    c[nz] = psi.coeffs[nz] / np.sqrt(absk[nz])
    c[0] = mean
    return AmplitudeState(c, psi.tau)


def _weighted_sum(state: AmplitudeState, grid: SpectralGrid, weights: np.ndarray) -> float:
    # sum_k w(k) |c/dk|^2 dk
    return float(np.sum(weights * np.abs(state.coeffs) ** 2) / grid.dk)


def homogeneous_norm(state: AmplitudeState, s: float, grid: SpectralGrid) -> float:
    """Homogeneous Sobolev norm ``(sum_{k != 0} |k|^{2s} |psi_hat|^2 dk)^{1/2}``."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    absk = np.abs(grid.k)
    w = np.where(absk > 0, absk ** (2.0 * s), 0.0) if s else (absk > 0).astype(float)
    return math.sqrt(_weighted_sum(state, grid, w))


def sobolev_norm(state: AmplitudeState, s: float, grid: SpectralGrid) -> float:
    """Inhomogeneous norm with weight ``1 + |k|^{2s}``."""
    absk = np.abs(grid.k)
    return math.sqrt(_weighted_sum(state, grid, 1.0 + absk ** (2.0 * s)))


def l1_moment(state: AmplitudeState, grid: SpectralGrid) -> float:
    """``sum |k|^{3/2} |psi_hat(k)| dk``; the ``dk`` factors cancel in coefficient units."""
    return float(np.sum(np.abs(grid.k) ** 1.5 * np.abs(state.coeffs)))


def existence_time_scale(psi0: AmplitudeState, s: float, grid: SpectralGrid) -> float:
    """Scaling product ``Q = |psi0|_{L2}^{1-2/s} |psi0|_{H^s}^{2/s}``.

    The local existence time is ``1/(K_s Q)`` for an unknown constant
    ``K_s``, so only ``Q`` is returned.  Homogeneous of degree one in ``psi0``.
    """
    if not s > 2:
        raise ValueError(f"s must exceed 2, got {s}")
    l2 = homogeneous_norm(psi0, 0.0, grid)
    if l2 == 0.0:
        return 0.0
    return l2 ** (1.0 - 2.0 / s) * sobolev_norm(psi0, s, grid) ** (2.0 / s)


def apriori_envelope(hs_norm0: float, l2_norm0: float, s: float, c_const: float, tau: float) -> float:
    """Gronwall envelope for ``|psi(tau)|_{H^s}`` given a user-supplied constant ``C C_s``."""
    if not s > 2:
        raise ValueError(f"s must exceed 2, got {s}")
    base = 1.0 - (2.0 * c_const / s) * l2_norm0 ** (1.0 - 2.0 / s) * hs_norm0 ** (2.0 / s) * abs(tau)
    if base <= 0.0:
        raise ValueError(f"envelope has blown up at |tau| = {abs(tau):g}")
    return hs_norm0 * base ** (-s / 2.0)


def envelope_blowup_time(hs_norm0: float, l2_norm0: float, s: float, c_const: float) -> float:
    rate = (2.0 * c_const / s) * l2_norm0 ** (1.0 - 2.0 / s) * hs_norm0 ** (2.0 / s)
    return math.inf if rate == 0 else 1.0 / rate


def fit_envelope_constant(taus, hs_norms, l2_norm0: float, s: float) -> float:
    """Smallest constant for which :func:`apriori_envelope` dominates the observed ``H^s`` norms."""
    taus = np.asarray(taus, dtype=float)
    hs = np.asarray(hs_norms, dtype=float)
    h0 = hs[0]
    rate = (2.0 / s) * l2_norm0 ** (1.0 - 2.0 / s) * h0 ** (2.0 / s)
    mask = (np.abs(taus) > 0) & (hs > h0)
    if rate == 0 or not np.any(mask):
        return 0.0
    need = (1.0 - (h0 / hs[mask]) ** (2.0 / s)) / (rate * np.abs(taus[mask]))
    return float(np.max(need))


@dataclass
class BlowupIntegral:
    """Trapezoid accumulator for ``int_0^T |psi|_{s'}^{2/s'} dtau``."""

    s_prime: float = 2.5
    value: float = 0.0
    last_integrand: float | None = None
    history: list[float] = field(default_factory=list, repr=False)

    def integrand(self, state: AmplitudeState, grid: SpectralGrid) -> float:
        return homogeneous_norm(state, self.s_prime, grid) ** (2.0 / self.s_prime)


def blowup_integral_update(record: BlowupIntegral, state: AmplitudeState, s_prime: float, d_tau: float,
                           grid: SpectralGrid) -> float:
    """Add one trapezoid panel of width ``d_tau`` ending at ``state``; returns the running integral."""
    if not s_prime > 2:
        raise ValueError(f"s_prime must exceed 2, got {s_prime}")
    record.s_prime = s_prime
    current = record.integrand(state, grid)
    if record.last_integrand is not None:
        record.value += 0.5 * abs(d_tau) * (record.last_integrand + current)
    record.last_integrand = current
    record.history.append(current)
    return record.value


# --- interpolation inequality -------------------------------------------------

def _check_pq(p: float, q: float) -> None:
    if not q < 0.5 < p:
        raise ValueError(f"need q < 1/2 < p, got p={p}, q={q}")


def split_constants(p: float, q: float) -> tuple[float, float]:
    """Cauchy-Schwarz constants for the low (``|l| <= L``) and high (``|l| >= L``) pieces."""
    _check_pq(p, q)
    return math.sqrt(2.0 / (1.0 - 2.0 * q)), math.sqrt(2.0 / (2.0 * p - 1.0))


def split_bound(cutoff: float, p: float, q: float, norm_low: float, norm_high: float) -> float:
    """``C_q L^{1/2-q} |psi|_{q+3/2} + C_p L^{1/2-p} |psi|_{p+3/2}``."""
    cq, cp = split_constants(p, q)
    return cq * cutoff ** (0.5 - q) * norm_low + cp * cutoff ** (0.5 - p) * norm_high


def interpolation_exponents(p: float, q: float) -> tuple[float, float]:
    _check_pq(p, q)
    return (p - 0.5) / (p - q), (0.5 - q) / (p - q)


def interpolation_constant(p: float, q: float) -> float:
    """Constant obtained by choosing the cutoff that equalizes the two pieces.

    ``C_{p,q} = 2 C_q^{(p-1/2)/(p-q)} C_p^{(1/2-q)/(p-q)}``.
    """
    cq, cp = split_constants(p, q)
    e_low, e_high = interpolation_exponents(p, q)
    return 2.0 * cq ** e_low * cp ** e_high


def sharp_interpolation_constant(p: float, q: float) -> float:
    """Constant from the true minimum over the cutoff rather than the equalizer.

    Minimizing ``a u^{1/2-q} + b u^{1/2-p}`` over ``u > 0`` gives a
    constant smaller than :func:`interpolation_constant` by the factor
    ``m(alpha, beta) / 2`` with ``m = min_u (u^alpha + u^-beta)``.
    """
    alpha, beta = 0.5 - q, p - 0.5
    u = (beta / alpha) ** (1.0 / (alpha + beta))
    return interpolation_constant(p, q) * 0.5 * (u ** alpha + u ** -beta)


def equalizing_cutoff(p: float, q: float, norm_low: float, norm_high: float) -> float:
    """Root of ``C_q L^{1/2-q} |psi|_{q+3/2} = C_p L^{1/2-p} |psi|_{p+3/2}`` found by bracketing."""
    cq, cp = split_constants(p, q)

    def gap(log_l: float) -> float:
        return (math.log(cq * norm_low) + (0.5 - q) * log_l) - (math.log(cp * norm_high) + (0.5 - p) * log_l)

    lo, hi = -1.0, 1.0
    while gap(lo) > 0:
        lo *= 2.0
    while gap(hi) < 0:
        hi *= 2.0
    return math.exp(brentq(gap, lo, hi, xtol=1e-15, rtol=1e-15))


@dataclass(frozen=True)
class ConstantValidation:
    closed_form: float
    equalizer_numeric: float
    sharp_closed_form: float
    sharp_numeric: float

    @property
    def equalizer_rel_err(self) -> float:
        return abs(self.closed_form - self.equalizer_numeric) / self.closed_form

    @property
    def sharp_rel_err(self) -> float:
        return abs(self.sharp_closed_form - self.sharp_numeric) / self.sharp_closed_form


def validate_interpolation_constant(p: float, q: float, norm_low: float = 1.7,
                                    norm_high: float = 0.6) -> ConstantValidation:
    """Check the closed-form constants against numerics on sample norm values.

    The equalizer value is recovered by solving for the cutoff with
    :func:`equalizing_cutoff`; the sharp value by minimizing the split bound
    over ``log L``.
    """
    e_low, e_high = interpolation_exponents(p, q)
    scale = norm_low ** e_low * norm_high ** e_high
    cutoff = equalizing_cutoff(p, q, norm_low, norm_high)
    eq_numeric = split_bound(cutoff, p, q, norm_low, norm_high) / scale
    log_c = math.log(cutoff)
    res = minimize_scalar(lambda x: split_bound(math.exp(x), p, q, norm_low, norm_high),
                          bounds=(log_c - 30.0, log_c + 30.0), method="bounded", options={"xatol": 1e-10})
    sharp_numeric = float(res.fun) / scale
    return ConstantValidation(interpolation_constant(p, q), eq_numeric,
                              sharp_interpolation_constant(p, q), sharp_numeric)


@dataclass(frozen=True)
class InterpolationResult:
    lhs: float
    rhs: float
    passed: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else (0.0 if self.lhs == 0 else math.inf)


def interpolation_check(state: AmplitudeState, p: float, q: float, grid: SpectralGrid) -> InterpolationResult:
    """Evaluate both sides of the ``L^1`` moment interpolation inequality for a ``psi`` state."""
    e_low, e_high = interpolation_exponents(p, q)
    lhs = l1_moment(state, grid)
    n_low = homogeneous_norm(state, q + 1.5, grid)
    n_high = homogeneous_norm(state, p + 1.5, grid)
    if (n_low == 0.0) != (n_high == 0.0):
        raise AssertionError("one interpolation norm vanishes while the other does not")
    rhs = interpolation_constant(p, q) * n_low ** e_low * n_high ** e_high
    return InterpolationResult(lhs, rhs, lhs <= rhs * (1.0 + 1e-10))


def cyclic_triple_sum(psi: AmplitudeState, grid: SpectralGrid, s: float = 0.0) -> tuple[float, float]:
    """Discrete ``sum_k sum_l k|k|^{2s} S(k-l,l) psi(k-l) psi(l) psi(-k)`` and its absolute scale.

    For ``s = 0`` the cyclic symmetry of ``S`` makes the sum vanish.
    """
    from .solver import convolution_plan  # local import: solver depends on this module

    plan = convolution_plan(grid.n_modes, "noncanonical", grid.length)
    conv, absconv = plan.apply_with_scale(psi.coeffs)
    weight = grid.k * np.abs(grid.k) ** (2.0 * s)
    total = np.sum(weight * conv * np.conj(psi.coeffs))
    scale = np.sum(np.abs(weight) * absconv * np.abs(psi.coeffs))
    return float(abs(total)), float(scale)


def analyticity_strip_width(state: AmplitudeState, grid: SpectralGrid, floor: float = 1e-13) -> float:
    """Decay rate ``delta`` in ``|phi_hat(k)| ~ exp(-delta k)`` from a log-linear fit.

    Only modes above ``floor`` times the largest coefficient enter the fit.
    Returns ``inf`` when fewer than four modes qualify (nothing to resolve).
    A shrinking ``delta`` tracks the approach of a complex singularity to the
    real axis; once it falls to a few grid spacings the grid no longer
    resolves the solution.
    """
    half = grid.n_modes // 2
    mags = np.abs(state.coeffs[1:half])
    top = mags.max(initial=0.0)
    if top == 0.0:
        return math.inf
    keep = mags > floor * top
    if np.count_nonzero(keep) < 4:
        return math.inf
    k = grid.k[1:half][keep]
    slope = np.polyfit(k, np.log(mags[keep]), 1)[0]
    return float(-slope) if slope < 0 else 0.0


def observed_blowup_time(taus, strip_widths, grid: SpectralGrid, spacings: float = 2.0) -> float:
    """First time the strip width drops below ``spacings`` grid spacings; ``inf`` if never."""
    limit = spacings * grid.length / grid.n_modes
    for tau, width in zip(taus, strip_widths):
        if width is not None and width < limit:
            return float(tau)
    return math.inf
