"""Time integration of the canonical amplitude equation.

Four right-hand sides discretize the same dynamics:

* ``SpectralConvolution``: the defining wavenumber-space convolution with the
  canonical kernel, O(N^2).
* ``SpatialHilbert`` and ``SpatialCommutator``: the two physical-space forms
  built from Hilbert transforms and alias-free products, O(N log N).
* ``Noncanonical``: the convolution with kernel ``S`` acting on
  ``psi_hat = |k|^{1/2} phi_hat``, O(N^2).

The alias-free products reproduce the truncated convolution exactly, so all
four agree to rounding error on every state.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Protocol

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import kernels
from .analysis import NormLadder, homogeneous_norm, psi_from_phi
from .spectral import AmplitudeState, SpectralGrid, check_hermitian, enforce_hermitian, to_physical

DT_FLOOR = 1e-12
DT_UNDERFLOW = 1e-14
DRIFT_LIMIT = 1e-4


class Formulation(str, enum.Enum):
    SPECTRAL_CONVOLUTION = "SpectralConvolution"
    SPATIAL_HILBERT = "SpatialHilbert"
    SPATIAL_COMMUTATOR = "SpatialCommutator"
    NONCANONICAL = "Noncanonical"

    @classmethod
    def parse(cls, text: str) -> "Formulation":
        key = text.replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown formulation {text!r}; choose from {[m.value for m in cls]}")


class StopReason(str, enum.Enum):
    T_END = "t_end"
    BLOWUP_DT = "blowup_dt"
    BLOWUP_GRADIENT = "blowup_gradient"
    DRIFT = "drift"
    MAX_STEPS = "max_steps"


class StepSizeUnderflow(RuntimeError):
    """The stiffness-limited step fell below the underflow threshold."""


@dataclass(frozen=True)
class SolverConfig:
    formulation: Formulation = Formulation.SPATIAL_HILBERT
    dt_safety: float = 0.5
    t_end: float = 1.0
    max_steps: int = 10_000_000
    stop_on_blowup: bool = True
    gradient_factor: float = 1e3
    drift_limit: float = DRIFT_LIMIT
    diag_every: int = 10

    def __post_init__(self):
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        if not 0 < self.dt_safety <= 1:
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be finite and >= 0, got {self.t_end}")
        if self.max_steps < 1 or self.diag_every < 1:
            raise ValueError("max_steps and diag_every must be positive")
        if self.gradient_factor <= 1:
            raise ValueError("gradient_factor must exceed 1")


def thread_count() -> int:
    """Worker threads for the O(N^2) convolution, capped by ``SURFWAVE_THREADS``."""
    cap = os.environ.get("SURFWAVE_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"SURFWAVE_THREADS must be an integer, got {cap!r}") from None
    return n


# --- O(N^2) convolution -------------------------------------------------------

class ConvolutionPlan:
    """Precomputed kernel table for ``sum_l K(k-l, l) c(k-l) c(l)`` over the retained band.

    Only rows ``j >= 0`` are evaluated; the rest follow from Hermitian
    symmetry because every kernel here is real and even.  The factor
    ``c(k-l)`` is read through a strided window so no index gather is needed.
    """

    def __init__(self, n_modes: int, kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 row_factor: np.ndarray, length: float):
        self.n = n_modes
        half = n_modes // 2
        dk = 2.0 * np.pi / length
        self.band = np.arange(-half + 1, half)                 # ascending retained j
        self.rows = np.arange(half)                            # j = 0 .. N/2-1
        k_row = dk * self.rows[:, None]
        k_col = dk * self.band[None, :]
        self.weights = np.ascontiguousarray(kernel(k_row - k_col, k_col), dtype=np.float64)
        self.row_factor = row_factor[: half]
        self._fft_of_band = np.mod(self.band, n_modes)

    def _windows(self, band_coeffs: np.ndarray) -> np.ndarray:
        # windows[j, p] = band_coeffs[j - p + N - 2] with zero outside the band
        half = self.n // 2
        ext = np.concatenate([band_coeffs, np.zeros(half, dtype=band_coeffs.dtype)])
        rev = ext[::-1]
        view = sliding_window_view(rev, band_coeffs.size)
        start = rev.size - 1 - (self.n - 2)
        return view[start - self.rows]

    def _rows(self, band_coeffs: np.ndarray, lo: int, hi: int) -> np.ndarray:
        # row blocks keep the complex temporary cache-sized
        win = self._windows(band_coeffs)
        block = max(1, (1 << 15) // self.n)
        out = np.empty(hi - lo, dtype=np.complex128)
        for i in range(lo, hi, block):
            j = min(i + block, hi)
            out[i - lo:j - lo] = (self.weights[i:j] * win[i:j]) @ band_coeffs
        return out

    def convolve(self, coeffs: np.ndarray) -> np.ndarray:
        """Full FFT-ordered array of the raw sums (no row factor)."""
        band_coeffs = coeffs[self._fft_of_band]
        half = self.n // 2
        workers = thread_count()
        if workers > 1 and half >= 256:
            edges = np.linspace(0, half, workers + 1).astype(int)
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda ab: self._rows(band_coeffs, *ab), zip(edges[:-1], edges[1:])))
            pos = np.concatenate(parts)
        else:
            pos = self._rows(band_coeffs, 0, half)
        out = np.zeros(self.n, dtype=np.complex128)
        out[:half] = pos
        out[half + 1:] = np.conj(pos[1:][::-1])
        return out

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        sums = self.convolve(coeffs)
        out = np.zeros_like(sums)
        half = self.n // 2
        out[:half] = self.row_factor * sums[:half]
        out[half + 1:] = np.conj(out[1:half][::-1])
        return out

    def apply_with_scale(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Raw sums and the same sums with absolute values everywhere (for relative error scales)."""
        sums = self.convolve(coeffs)
        band_abs = np.abs(coeffs[self._fft_of_band]).astype(np.complex128)
        half = self.n // 2
        pos = np.real((np.abs(self.weights) * self._windows(band_abs)) @ band_abs)
        scale = np.zeros(self.n)
        scale[:half] = pos
        scale[half + 1:] = pos[1:][::-1]
        return sums, scale


@lru_cache(maxsize=16)
def convolution_plan(n_modes: int, kind: str, length: float = 2.0 * np.pi) -> ConvolutionPlan:
    """Cached plan; ``kind`` is ``"canonical"`` or ``"noncanonical"``."""
    grid = SpectralGrid(n_modes, length)
    if kind == "canonical":
        return ConvolutionPlan(n_modes, kernels.lambda_canonical, -1j * np.sign(grid.k), length)
    if kind == "noncanonical":
        return ConvolutionPlan(n_modes, kernels.s_kernel, -1j * grid.k, length)
    raise ValueError(f"unknown plan kind {kind!r}")


# --- right-hand sides ---------------------------------------------------------

def rhs_spectral_convolution(state: AmplitudeState, grid: SpectralGrid) -> AmplitudeState:
    """``d c_k / d tau = -i sgn(k) sum_l Lambda(k-l, l) c_{k-l} c_l`` in coefficient units."""
    plan = convolution_plan(grid.n_modes, "canonical", grid.length)
    return AmplitudeState(plan.apply(state.coeffs), state.tau)


def rhs_noncanonical(psi_state: AmplitudeState, grid: SpectralGrid) -> AmplitudeState:
    """``d psi_k / d tau = -i k sum_l S(k-l, l) psi_{k-l} psi_l``."""
    plan = convolution_plan(grid.n_modes, "noncanonical", grid.length)
    return AmplitudeState(plan.apply(psi_state.coeffs), psi_state.tau)


class SpatialVariant(str, enum.Enum):
    HILBERT_SQUARE = "HilbertSquare"
    COMMUTATOR = "Commutator"


class SpatialPlan:
    """Multipliers and index pairs for the alias-free physical-space right-hand sides.

    Every field entering a product is zero-padded to ``3N/2`` points and
    transformed once; the products are truncated back to ``|j| < N/2``,
    which reproduces the truncated convolution exactly.  The ``3N/2``
    normalization factors are folded into the multipliers.
    """

    def __init__(self, n_modes: int, length: float):
        self.n = n_modes
        self.half = n_modes // 2
        self.padded = 3 * n_modes // 2
        k = (2.0 * np.pi / length) * np.arange(self.half)
        hil = -1j * np.sign(k)
        m = float(self.padded)
        k2 = k * k
        # +1/2 H[Phi^2]_xx + Phi phi_xx
        self.square = (np.stack([hil * m, -k2 * m]), [0, 0], [0, 1],
                       np.stack([-0.5 * hil * k2 / m, np.full(self.half, 1.0 / m)]))
        # [H, Phi] Phi_xx + H[Phi_x^2], fields Phi, Phi_xx, H[Phi_xx], Phi_x
        self.commutator = (np.stack([hil * m, -k2 * hil * m, -k2 * hil * hil * m, 1j * k * hil * m]),
                           [0, 0, 3], [1, 2, 3],
                           np.stack([hil / m, np.full(self.half, -1.0 / m, dtype=complex), hil / m]))

    def apply(self, coeffs: np.ndarray, variant: SpatialVariant) -> np.ndarray:
        field_mult, left, right, out_mult = (self.square if variant is SpatialVariant.HILBERT_SQUARE
                                             else self.commutator)
        half = self.half
        c = coeffs[..., None, :half]
        buf = np.zeros(coeffs.shape[:-1] + (field_mult.shape[0], self.padded // 2 + 1), dtype=np.complex128)
        buf[..., :half] = field_mult * c
        phys = np.fft.irfft(buf, n=self.padded, axis=-1)
        spec = np.fft.rfft(phys[..., left, :] * phys[..., right, :], axis=-1)[..., :half]
        res = np.sum(out_mult * spec, axis=-2)
        res[..., 0] = 0.0
        out = np.zeros(coeffs.shape, dtype=np.complex128)
        out[..., :half] = res
        out[..., half + 1:] = np.conj(res[..., :0:-1])
        return out


@lru_cache(maxsize=16)
def spatial_plan(n_modes: int, length: float = 2.0 * np.pi) -> SpatialPlan:
    return SpatialPlan(n_modes, length)


def spatial_rhs_coeffs(coeffs: np.ndarray, grid: SpectralGrid,
                       variant: SpatialVariant | str = SpatialVariant.HILBERT_SQUARE) -> np.ndarray:
    """Array version of :func:`rhs_spatial`; leading axes hold independent states."""
    if coeffs.shape[-1] != grid.n_modes:
        raise ValueError(f"expected {grid.n_modes} coefficients, got {coeffs.shape[-1]}")
    return spatial_plan(grid.n_modes, grid.length).apply(coeffs, SpatialVariant(variant))


def rhs_spatial(state: AmplitudeState, grid: SpectralGrid,
                variant: SpatialVariant | str = SpatialVariant.HILBERT_SQUARE) -> AmplitudeState:
    """Physical-space assembly of the right-hand side.

    With ``H[e^{ikx}] = -i sgn(k) e^{ikx}`` and ``Phi = H[phi]`` the
    convolution form equals ``+1/2 H[Phi^2]_xx + Phi phi_xx`` or, equivalently,
    ``[H, Phi] Phi_xx + H[Phi_x^2]``.
    """
    return AmplitudeState(spatial_rhs_coeffs(state.coeffs, grid, variant), state.tau)


# --- stepping -----------------------------------------------------------------

class _Dynamics:
    """Evolved variable and right-hand side of one formulation, on raw coefficient arrays."""

    def __init__(self, formulation: Formulation, grid: SpectralGrid):
        self.formulation = formulation
        self.noncanonical = formulation is Formulation.NONCANONICAL
        absk = np.abs(grid.k)
        self._to_psi = np.sqrt(absk)
        self._to_phi = np.where(absk > 0, 1.0 / np.where(absk > 0, self._to_psi, 1.0), 0.0)
        if formulation is Formulation.SPECTRAL_CONVOLUTION:
            self.rhs = convolution_plan(grid.n_modes, "canonical", grid.length).apply
        elif formulation is Formulation.NONCANONICAL:
            self.rhs = convolution_plan(grid.n_modes, "noncanonical", grid.length).apply
        else:
            plan = spatial_plan(grid.n_modes, grid.length)
            variant = (SpatialVariant.HILBERT_SQUARE if formulation is Formulation.SPATIAL_HILBERT
                       else SpatialVariant.COMMUTATOR)
            self.rhs = lambda c: plan.apply(c, variant)

    def forward(self, phi: np.ndarray) -> np.ndarray:
        out = self._to_psi * phi if self.noncanonical else phi.copy()
        out[0] = 0.0
        return out

    def backward(self, var: np.ndarray, mean: complex) -> np.ndarray:
        out = self._to_phi * var if self.noncanonical else var.copy()
        out[0] = mean
        return out


def _hilbert_sup(coeffs: np.ndarray, grid: SpectralGrid) -> float:
    half = grid.n_modes // 2
    spec = -1j * np.sign(grid.j[: half + 1]) * coeffs[: half + 1]
    spec[half] = 0.0
    return float(np.max(np.abs(np.fft.irfft(spec, n=grid.n_modes)))) * grid.n_modes


def stable_dt(state: AmplitudeState, grid: SpectralGrid, dt_safety: float) -> float:
    """``dt_safety / (max|H[phi]| k_max^2 + floor)``."""
    return dt_safety / (_hilbert_sup(state.coeffs, grid) * grid.k_max ** 2 + DT_FLOOR)


def _rk4(c: np.ndarray, dt: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    # every right-hand side returns a Hermitian array with zero mean, so the
    # stages need no projection; one at the end removes accumulated asymmetry
    k1 = rhs(c)
    k2 = rhs(c + 0.5 * dt * k1)
    k3 = rhs(c + 0.5 * dt * k2)
    k4 = rhs(c + dt * k3)
    out = enforce_hermitian(c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    out[0] = c[0]
    return out


def step(state: AmplitudeState, cfg: SolverConfig, grid: SpectralGrid,
         dt: float | None = None) -> AmplitudeState:
    """Advance one RK4 step; ``dt`` defaults to the stiffness heuristic."""
    check_hermitian(state)
    if dt is None:
        dt = stable_dt(state, grid, cfg.dt_safety)
    if dt < DT_UNDERFLOW:
        raise StepSizeUnderflow(f"step size {dt:.3e} below {DT_UNDERFLOW:g}")
    dyn = _Dynamics(cfg.formulation, grid)
    new = _rk4(dyn.forward(state.coeffs), dt, dyn.rhs)
    return AmplitudeState(dyn.backward(new, state.coeffs[0]), state.tau + dt)


# --- diagnostics and runs -----------------------------------------------------

@dataclass
class StepDiagnostics:
    tau: float
    psi_l2: float
    sup_phi_x: float
    hs_norms: dict[str, float]
    blowup_integral: float
    step: int = 0
    dt: float = 0.0
    drift: float = 0.0
    oscillation: float = 0.0
    l1_moment: float = 0.0
    strip_width: float = math.inf

    def to_json(self) -> dict:
        return {"tau": self.tau, "step": self.step, "dt": self.dt, "psi_l2": self.psi_l2,
                "sup_phi_x": self.sup_phi_x, "oscillation": self.oscillation, "hs_norms": self.hs_norms,
                "blowup_integral": self.blowup_integral, "l1_moment": self.l1_moment, "drift": self.drift,
                "strip_width": self.strip_width if math.isfinite(self.strip_width) else None}


class _Monitor:
    """Per-step quantities computed straight from coefficient arrays."""

    def __init__(self, grid: SpectralGrid, ladder: NormLadder):
        self.grid = grid
        self.ladder = ladder
        absk = np.abs(grid.k)
        # |psi_hat|^2 = |k| |c|^2, and the norm carries |c/dk|^2 dk
        self.l2_weight = absk / grid.dk
        self.crit_weight = absk ** (2.0 * ladder.s_prime + 1.0) / grid.dk
        self.ik = 1j * grid.k

    def sup_gradient(self, phi: np.ndarray) -> float:
        half = self.grid.n_modes // 2
        return float(np.max(np.abs(np.fft.irfft((self.ik * phi)[: half + 1], n=self.grid.n_modes)))) * self.grid.n_modes

    def psi_l2(self, phi: np.ndarray) -> float:
        return math.sqrt(float(np.dot(self.l2_weight, phi.real ** 2 + phi.imag ** 2)))

    def criterion_integrand(self, phi: np.ndarray) -> float:
        norm = math.sqrt(float(np.dot(self.crit_weight, phi.real ** 2 + phi.imag ** 2)))
        return norm ** (2.0 / self.ladder.s_prime)


def measure(state: AmplitudeState, grid: SpectralGrid, ladder: NormLadder) -> dict:
    """Norms and shape quantities of a ``phi`` state."""
    from .analysis import analyticity_strip_width, l1_moment

    psi = psi_from_phi(state, grid)
    values = to_physical(state, grid)
    mon = _Monitor(grid, ladder)
    return {
        "psi_l2": homogeneous_norm(psi, 0.0, grid),
        "sup_phi_x": mon.sup_gradient(state.coeffs),
        "oscillation": float(np.max(values) - np.min(values)),
        "hs_norms": {f"{s:g}": homogeneous_norm(psi, s, grid) for s in ladder.s_values},
        "l1_moment": l1_moment(psi, grid),
        "strip_width": analyticity_strip_width(state, grid),
        "psi": psi,
    }


class DiagnosticSink(Protocol):
    def __call__(self, record: dict) -> None: ...


@dataclass
class SimulationRecord:
    diagnostics: list[StepDiagnostics] = field(default_factory=list)
    snapshots: list[tuple[float, object]] = field(default_factory=list)
    stop_reason: StopReason = StopReason.T_END
    final_state: AmplitudeState | None = None
    steps: int = 0
    initial_psi_l2: float = 0.0
    existence_scale: float = 0.0
    max_drift: float = 0.0
    blowup_integral: float = 0.0

    def exit_record(self) -> dict:
        return {"event": "stop", "reason": self.stop_reason.value, "steps": self.steps,
                "tau": self.final_state.tau if self.final_state is not None else 0.0,
                "max_drift": self.max_drift, "blowup_integral": self.blowup_integral,
                "existence_scale": self.existence_scale}


def run(initial: AmplitudeState, cfg: SolverConfig, grid: SpectralGrid, sink: DiagnosticSink | None = None,
        ladder: NormLadder | None = None, snapshot_every: float | None = None,
        snapshot_writer: Callable[[AmplitudeState], object] | None = None) -> SimulationRecord:
    """Integrate for ``cfg.t_end`` units of slow time or until a blow-up indicator fires.

    Conservation drift, the gradient indicator and the blow-up integral are
    updated every step; full diagnostics go to ``sink`` every
    ``cfg.diag_every`` steps and at the end.  Snapshots are taken at the
    start, at multiples of ``snapshot_every`` (steps are shortened to land on
    them) and at the end, via ``snapshot_writer`` when given.
    """
    from .analysis import existence_time_scale

    ladder = ladder or NormLadder()
    check_hermitian(initial)
    if snapshot_every is not None and not snapshot_every > 0:
        raise ValueError("snapshot_every must be positive")
    record = SimulationRecord()
    mon = _Monitor(grid, ladder)
    dyn = _Dynamics(cfg.formulation, grid)
    phi = AmplitudeState(initial.coeffs).coeffs
    mean = phi[0]
    tau = float(initial.tau)
    t_stop = tau + cfg.t_end
    var = dyn.forward(phi)

    psi_l2_0 = mon.psi_l2(phi)
    grad0 = mon.sup_gradient(phi)
    integrand = mon.criterion_integrand(phi)
    integral = 0.0
    record.initial_psi_l2 = psi_l2_0
    if ladder.s_values and max(ladder.s_values) > 2:
        record.existence_scale = existence_time_scale(psi_from_phi(AmplitudeState(phi), grid),
                                                      max(ladder.s_values), grid)

    def publish(n: int, dt: float, drift: float):
        st = AmplitudeState(phi, tau)
        m = measure(st, grid, ladder)
        d = StepDiagnostics(tau, m["psi_l2"], m["sup_phi_x"], m["hs_norms"], integral, n, dt, drift,
                            m["oscillation"], m["l1_moment"], m["strip_width"])
        record.diagnostics.append(d)
        if sink is not None:
            sink(d.to_json())

    def snap():
        st = AmplitudeState(phi, tau)
        record.snapshots.append((tau, snapshot_writer(st) if snapshot_writer else st))

    publish(0, 0.0, 0.0)
    snap()
    next_snap = tau + snapshot_every if snapshot_every else math.inf
    n = 0
    dt = 0.0
    drift = 0.0
    reason = StopReason.T_END
    published = 0
    while tau < t_stop:
        if n >= cfg.max_steps:
            reason = StopReason.MAX_STEPS
            break
        dt = cfg.dt_safety / (_hilbert_sup(phi, grid) * grid.k_max ** 2 + DT_FLOOR)
        if dt < DT_UNDERFLOW:
            if not cfg.stop_on_blowup:
                raise StepSizeUnderflow(f"step size {dt:.3e} below {DT_UNDERFLOW:g}")
            reason = StopReason.BLOWUP_DT
            break
        landing = min(t_stop, next_snap)
        hit = tau + dt >= landing
        if hit:
            dt = landing - tau
        var = _rk4(var, dt, dyn.rhs)
        tau = landing if hit else tau + dt
        n += 1
        phi = dyn.backward(var, mean)
        new_integrand = mon.criterion_integrand(phi)
        integral += 0.5 * dt * (integrand + new_integrand)
        integrand = new_integrand
        drift = abs(mon.psi_l2(phi) - psi_l2_0) / psi_l2_0 if psi_l2_0 else 0.0
        record.max_drift = max(record.max_drift, drift)
        if n % cfg.diag_every == 0:
            publish(n, dt, drift)
            published = n
        if tau >= next_snap:
            snap()
            next_snap += snapshot_every
        if cfg.stop_on_blowup:
            if grad0 > 0 and mon.sup_gradient(phi) > cfg.gradient_factor * grad0:
                reason = StopReason.BLOWUP_GRADIENT
                break
            if drift > cfg.drift_limit:
                reason = StopReason.DRIFT
                break
    if published != n:
        publish(n, dt, drift)
    if record.snapshots[-1][0] != tau:
        snap()
    record.stop_reason = reason
    record.final_state = AmplitudeState(phi, tau)
    record.steps = n
    record.blowup_integral = integral
    if sink is not None:
        sink(record.exit_record())
    return record


def evolve(initial: AmplitudeState, grid: SpectralGrid, t_end: float,
           formulation: Formulation | str = Formulation.SPATIAL_HILBERT, dt_safety: float = 0.5) -> AmplitudeState:
    """Final state after ``t_end`` with blow-up stops disabled."""
    cfg = SolverConfig(formulation=formulation, dt_safety=dt_safety, t_end=t_end, stop_on_blowup=False,
                       diag_every=10_000_000)
    return run(initial, cfg, grid).final_state
