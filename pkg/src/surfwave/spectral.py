"""Periodic spectral discretization of the interface profile.

Coefficients are stored in numpy FFT order (``j = 0, 1, ..., N/2-1, -N/2,
..., -1``) and carry the forward ``1/N`` factor, so ``phi(theta_n) =
sum_j c_j exp(i k_j theta_n)``.  The Nyquist slot is always zero and the
mean (``j = 0``) is treated as frozen by the dynamics.

Continuum quantities (transforms on the real line, integrals over
wavenumber) are approximated by Riemann sums with spacing ``dk = 2 pi / L``;
the sampled continuum transform is ``c_j / dk``.  See :func:`continuum`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

HERMITIAN_TOL = 1e-10


class SymmetryError(ValueError):
    """Coefficient array is not the transform of a real signal."""


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic collocation grid with ``n_modes`` points on ``[0, length)``."""

    n_modes: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        n = self.n_modes
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ValueError(f"n_modes must be a power of two >= 16, got {n!r}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive and finite, got {self.length!r}")

    @cached_property
    def j(self) -> np.ndarray:
        """Integer wavenumbers in FFT order; the Nyquist slot reads ``-N/2``."""
        return np.fft.fftfreq(self.n_modes, 1.0 / self.n_modes).astype(np.int64)

    @cached_property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def k(self) -> np.ndarray:
        return self.dk * self.j

    @cached_property
    def k_max(self) -> float:
        return self.dk * (self.n_modes // 2)

    @cached_property
    def theta(self) -> np.ndarray:
        return self.length * np.arange(self.n_modes) / self.n_modes

    @property
    def nyquist(self) -> int:
        return self.n_modes // 2

    @cached_property
    def ascending(self) -> np.ndarray:
        """Index permutation listing ``j = -N/2+1, ..., N/2`` (Nyquist last)."""
        n = self.n_modes
        return np.concatenate([np.arange(n // 2 + 1, n), np.arange(0, n // 2 + 1)])

    def compatible(self, other: "SpectralGrid") -> bool:
        return self.n_modes == other.n_modes and np.isclose(self.length, other.length, rtol=1e-14, atol=0)


@dataclass
class AmplitudeState:
    """Fourier coefficients of a real profile at slow time ``tau``."""

    coeffs: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        c[c.size // 2] = 0.0
        self.coeffs = c

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    def copy(self) -> "AmplitudeState":
        return AmplitudeState(self.coeffs, self.tau)

    def scaled(self, alpha: float) -> "AmplitudeState":
        return AmplitudeState(alpha * self.coeffs, self.tau)


def _mirror(c: np.ndarray) -> np.ndarray:
    """Return ``c(-j)`` in FFT order."""
    return np.roll(c[::-1], 1)


def hermitian_defect(c: np.ndarray) -> float:
    """Largest ``|c(-j) - conj(c(j))|`` relative to ``max |c|``."""
    scale = np.max(np.abs(c), initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(_mirror(c) - np.conj(c))) / scale)


def enforce_hermitian(c: np.ndarray) -> np.ndarray:
    """Project onto Hermitian-symmetric arrays and zero the Nyquist slot."""
    out = 0.5 * (c + np.conj(_mirror(c)))
    out[c.size // 2] = 0.0
    return out


def check_hermitian(state: AmplitudeState, tol: float = HERMITIAN_TOL) -> None:
    defect = hermitian_defect(state.coeffs)
    if defect > tol:
        raise SymmetryError(f"coefficients violate Hermitian symmetry (defect {defect:.3e} > {tol:g})")


def _check_size(state: AmplitudeState, grid: SpectralGrid) -> None:
    if state.n_modes != grid.n_modes:
        raise ValueError(f"state has {state.n_modes} coefficients, grid has {grid.n_modes}")


def to_physical(state: AmplitudeState, grid: SpectralGrid) -> np.ndarray:
    """Real collocation values of ``state`` on ``grid.theta``."""
    _check_size(state, grid)
    check_hermitian(state)
    n = grid.n_modes
    return np.fft.irfft(state.coeffs[: n // 2 + 1] * n, n=n)


def to_spectral(values: np.ndarray, grid: SpectralGrid, tau: float = 0.0) -> AmplitudeState:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (grid.n_modes,):
        raise ValueError(f"expected {grid.n_modes} samples, got shape {values.shape}")
    return AmplitudeState(np.fft.fft(values) / grid.n_modes, tau)


def continuum(state: AmplitudeState, grid: SpectralGrid) -> np.ndarray:
    """Samples ``hat f(k_j)`` of the real-line transform ``(1/2pi) int f e^{-ik theta}``."""
    return state.coeffs / grid.dk


def hilbert(state: AmplitudeState, grid: SpectralGrid) -> AmplitudeState:
    """Hilbert transform with ``H[e^{ikx}] = -i sgn(k) e^{ikx}``; the mean maps to 0."""
    _check_size(state, grid)
    return AmplitudeState(-1j * np.sign(grid.j) * state.coeffs, state.tau)


def derivative(state: AmplitudeState, grid: SpectralGrid, order: int = 1) -> AmplitudeState:
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    _check_size(state, grid)
    return AmplitudeState((1j * grid.k) ** order * state.coeffs, state.tau)


def _padded_physical(c: np.ndarray, m: int) -> np.ndarray:
    n = c.size
    half = np.zeros(m // 2 + 1, dtype=np.complex128)
    half[: n // 2] = c[: n // 2]
    return np.fft.irfft(half * m, n=m)


def _truncated_spectral(values: np.ndarray, n: int) -> np.ndarray:
    m = values.size
    half = np.fft.rfft(values)[: n // 2] / m
    out = np.zeros(n, dtype=np.complex128)
    out[: n // 2] = half
    out[n // 2 + 1 :] = np.conj(half[1:][::-1])
    return out


def product_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Alias-free product of two Hermitian coefficient arrays.

    Inputs are zero-padded to ``3N/2`` points, multiplied pointwise and
    truncated back, which equals the exact convolution restricted to the
    retained band ``|j| < N/2``.
    """
    n = a.size
    m = 3 * n // 2
    return _truncated_spectral(_padded_physical(a, m) * _padded_physical(b, m), n)


def dealiased_product(a: AmplitudeState, b: AmplitudeState, grid: SpectralGrid) -> AmplitudeState:
    _check_size(a, grid)
    _check_size(b, grid)
    return AmplitudeState(product_coeffs(a.coeffs, b.coeffs), a.tau)


def l2_coefficient_norm(state: AmplitudeState) -> float:
    """``sqrt(sum |c_j|^2)``, equal to the RMS of the physical values (Parseval)."""
    return float(np.sqrt(np.sum(np.abs(state.coeffs) ** 2)))


def random_bandlimited(grid: SpectralGrid, rng: np.random.Generator, band: int | None = None,
                       slope: float = 1.0, mean: float = 0.0) -> AmplitudeState:
    """Random real profile with modes ``1 <= |j| <= band`` decaying like ``|j|^-slope``."""
    band = grid.n_modes // 3 if band is None else band
    if not 1 <= band < grid.n_modes // 2:
        raise ValueError(f"band must lie in [1, {grid.n_modes // 2 - 1}], got {band}")
    c = np.zeros(grid.n_modes, dtype=np.complex128)
    jj = np.arange(1, band + 1)
    amp = jj.astype(float) ** (-slope)
    c[jj] = amp * (rng.standard_normal(band) + 1j * rng.standard_normal(band))
    c[-jj] = np.conj(c[jj])
    c[0] = mean
    return AmplitudeState(c)


def single_mode(grid: SpectralGrid, j: int, amplitude: complex = 1.0) -> AmplitudeState:
    """``c_j = amplitude`` and ``c_{-j} = conj(amplitude)``."""
    if not 1 <= abs(j) < grid.n_modes // 2:
        raise ValueError(f"mode index {j} outside the retained band")
    c = np.zeros(grid.n_modes, dtype=np.complex128)
    c[j] = amplitude
    c[-j] = np.conj(amplitude)
    return AmplitudeState(c)
