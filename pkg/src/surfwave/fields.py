"""First-order plasma and vacuum fields generated by an interface profile.

Plasma unknowns are ordered ``(v1, v2, B1, B2, q)`` and live in ``eta > 0``;
vacuum unknowns are ``(H1, H2, E)`` in ``eta < 0``.  Spectral rows use the
coefficient units of :mod:`surfwave.spectral`; every relation checked here is
linear in the profile, so the units drop out of all relative residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import DispersionRoot, PhysicalConfig, dispersion_residual, plasma_discriminant, sigma_of
from .spectral import AmplitudeState, SpectralGrid, check_hermitian

EIGEN_TOL = 1e-10
PLASMA_NAMES = ("v1", "v2", "B1", "B2", "q")
VACUUM_NAMES = ("H1", "H2", "E")
JUMP_NAMES = ("kinematic", "plasma_field", "vacuum_field", "pressure", "electric")


class ConsistencyError(RuntimeError):
    """An internal algebraic identity failed beyond tolerance."""


def plasma_matrices(lam: float, cfg: PhysicalConfig) -> tuple[np.ndarray, np.ndarray]:
    """Real symmetric matrices of the linearized plasma system ``ik A U + B dU/deta = 0``."""
    w = lam - cfg.v1
    b = cfg.b1
    a_mat = np.array([[w, 0, b, 0, -1],
                      [0, w, 0, b, 0],
                      [b, 0, w, 0, 0],
                      [0, b, 0, w, 0],
                      [-1, 0, 0, 0, 0]], dtype=float)
    b_mat = np.zeros((5, 5))
    b_mat[1, 4] = b_mat[4, 1] = -1.0
    return a_mat, b_mat


@dataclass(frozen=True)
class PlasmaEigenvector:
    r: np.ndarray
    residual: float

    def conj(self) -> np.ndarray:
        return np.conj(self.r)


def eigenvector_residual(r: np.ndarray, lam: float, cfg: PhysicalConfig) -> float:
    """``|(iA - B) r|_inf / max(1, |r|_inf)``."""
    a_mat, b_mat = plasma_matrices(lam, cfg)
    return float(np.max(np.abs((1j * a_mat - b_mat) @ r)) / max(1.0, float(np.max(np.abs(r)))))


def build_eigenvector(root: DispersionRoot, cfg: PhysicalConfig, check: bool = True) -> PlasmaEigenvector:
    """``R = (lam - v1, i(lam - v1), -b1, -i b1, d)`` with ``d = (lam - v1)^2 - b1^2``."""
    lam = root.phase_velocity
    w = lam - cfg.v1
    d = plasma_discriminant(lam, cfg)
    r = np.array([w, 1j * w, -cfg.b1, -1j * cfg.b1, d], dtype=np.complex128)
    res = eigenvector_residual(r, lam, cfg)
    if check and res > EIGEN_TOL:
        raise ConsistencyError(f"eigenvector residual {res:.3e} exceeds {EIGEN_TOL:g}")
    return PlasmaEigenvector(r, res)


def root_at(lam: float, cfg: PhysicalConfig, template: DispersionRoot | None = None) -> DispersionRoot:
    """Root-like record at an arbitrary phase velocity (used for sensitivity scans)."""
    base = template or DispersionRoot(lam, 0.0, 0.0, None, math.nan)  # type: ignore[arg-type]
    return replace(base, phase_velocity=lam, sigma=sigma_of(lam, cfg.nu), discriminant=plasma_discriminant(lam, cfg))


def _check_profile(phi: AmplitudeState, grid: SpectralGrid) -> None:
    if phi.n_modes != grid.n_modes:
        raise ValueError(f"profile has {phi.n_modes} coefficients, grid has {grid.n_modes}")
    check_hermitian(phi)


def plasma_first_order(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig, eta: float,
                       grid: SpectralGrid) -> np.ndarray:
    """Spectral rows ``(5, N)``: ``-|k| phi_hat e^{-|k| eta}`` times ``R`` (k > 0) or ``conj(R)`` (k < 0).

    ``eta = 0`` gives the interface trace.
    """
    if eta < 0:
        raise ValueError(f"plasma fields live in eta >= 0, got {eta}")
    _check_profile(phi, grid)
    r = build_eigenvector(root, cfg, check=False).r
    absk = np.abs(grid.k)
    amp = -absk * phi.coeffs * np.exp(-absk * eta)
    vec = np.where(grid.k[None, :] > 0, r[:, None], np.conj(r)[:, None])
    out = amp[None, :] * vec
    out[:, 0] = 0.0
    out[:, grid.nyquist] = 0.0
    return out


def vacuum_first_order(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig, eta: float,
                       grid: SpectralGrid) -> np.ndarray:
    """Spectral rows ``(3, N)``: ``h1 phi_hat e^{sigma |k| eta} (-sigma|k|, ik, -i nu lam k)``."""
    if eta > 0:
        raise ValueError(f"vacuum fields live in eta <= 0, got {eta}")
    sig = root.sigma
    if sig <= 0:
        raise ValueError("vacuum fields need sigma > 0")
    _check_profile(phi, grid)
    k = grid.k
    absk = np.abs(k)
    amp = cfg.h1 * phi.coeffs * np.exp(sig * absk * eta)
    out = np.stack([-sig * absk * amp, 1j * k * amp, -1j * cfg.nu * root.phase_velocity * k * amp])
    out[:, 0] = 0.0
    out[:, grid.nyquist] = 0.0
    return out


def _relative(residual: np.ndarray, *terms: np.ndarray) -> float:
    scale = max((float(np.max(np.abs(t))) for t in terms), default=0.0)
    worst = float(np.max(np.abs(residual)))
    return 0.0 if scale == 0.0 else worst / scale


def jump_residuals(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig,
                   grid: SpectralGrid) -> np.ndarray:
    """Relative residuals of the five linearized interface conditions at ``eta = 0``.

    Order: kinematic, plasma tangential field, vacuum tangential field,
    pressure balance, tangential electric field.  Each is the worst mode's
    residual divided by the largest term appearing in that condition.
    """
    u = plasma_first_order(phi, root, cfg, 0.0, grid)
    v = vacuum_first_order(phi, root, cfg, 0.0, grid)
    ik_phi = 1j * grid.k * phi.coeffs
    ik_phi[0] = 0.0
    ik_phi[grid.nyquist] = 0.0
    lam = root.phase_velocity
    pairs = [
        ((lam - cfg.v1) * ik_phi, u[1]),
        (cfg.b1 * ik_phi, -u[3]),
        (cfg.h1 * ik_phi, -v[1]),
        (u[4], -cfg.h1 * v[0]),
        (v[2], cfg.nu * lam * cfg.h1 * ik_phi),
    ]
    return np.array([_relative(a + b, a, b) for a, b in pairs])


def interior_residuals(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig, grid: SpectralGrid,
                       eta_plasma: float = 0.3, eta_vacuum: float = -0.3) -> dict[str, float]:
    """Relative residuals of the bulk equations, with analytic ``eta`` derivatives."""
    lam = root.phase_velocity
    sig = root.sigma
    k = grid.k
    absk = np.abs(k)
    u = plasma_first_order(phi, root, cfg, eta_plasma, grid)
    du = -absk * u
    a_mat, b_mat = plasma_matrices(lam, cfg)
    system = 1j * k * (a_mat @ u) + b_mat @ du
    v = vacuum_first_order(phi, root, cfg, eta_vacuum, grid)
    dv = sig * absk * v
    h1, h2, e = v
    dh1, dh2, de = dv
    nl = cfg.nu * lam
    return {
        "plasma_system": _relative(system, 1j * k * (a_mat @ u), b_mat @ du),
        "plasma_divergence": _relative(1j * k * u[0] + du[1], 1j * k * u[0], du[1]),
        "maxwell_faraday_1": _relative(nl * 1j * k * h1 - de, nl * 1j * k * h1, de),
        "maxwell_faraday_2": _relative(nl * 1j * k * h2 + 1j * k * e, nl * 1j * k * h2, 1j * k * e),
        "maxwell_ampere": _relative(nl * 1j * k * e + 1j * k * h2 - dh1, nl * 1j * k * e, 1j * k * h2, dh1),
        "vacuum_divergence": _relative(1j * k * h1 + dh2, 1j * k * h1, dh2),
    }


# --- physical-space rendering ---------------------------------------------------

@dataclass
class FieldSnapshot:
    grid_theta: np.ndarray
    eta_plasma: np.ndarray
    eta_vacuum: np.ndarray
    plasma: np.ndarray          # (5, len(eta_plasma), N), real
    vacuum: np.ndarray          # (3, len(eta_vacuum), N), real
    interface: np.ndarray | None = None
    epsilon: float | None = None
    sigma: float = 1.0

    @property
    def grid_eta(self) -> np.ndarray:
        return np.concatenate([self.eta_vacuum, self.eta_plasma])

    def named(self) -> dict[str, np.ndarray]:
        out = {name: self.plasma[i] for i, name in enumerate(PLASMA_NAMES)}
        out.update({name: self.vacuum[i] for i, name in enumerate(VACUUM_NAMES)})
        return out

    def decay_ok(self, k_min: float, slack: float = 1.01) -> bool:
        """Fields at the deepest level stay below the slowest exponential envelope.

        Plasma fields decay at least like ``exp(-k_min eta)``, vacuum fields
        like ``exp(-sigma k_min |eta|)``.
        """
        checks = []
        for values, etas, rate in ((self.plasma, self.eta_plasma, k_min), (self.vacuum, self.eta_vacuum,
                                                                            self.sigma * k_min)):
            if etas.size < 2:
                continue
            order = np.argsort(np.abs(etas))
            near, far = order[0], order[-1]
            depth = abs(etas[far]) - abs(etas[near])
            top = np.max(np.abs(values[:, near, :]), axis=-1)
            bottom = np.max(np.abs(values[:, far, :]), axis=-1)
            checks.append(np.all(bottom <= top * math.exp(-rate * depth) * slack + 1e-300))
        return bool(all(checks))


def _rows_to_physical(rows: np.ndarray, n: int) -> np.ndarray:
    half = n // 2
    return np.fft.irfft(rows[..., : half + 1] * n, n=n, axis=-1)


def render_snapshot(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig, grid: SpectralGrid,
                    eta_plasma, eta_vacuum, epsilon: float | None = None) -> FieldSnapshot:
    """Physical-space first-order fields on a ``theta x eta`` grid.

    ``eta_plasma`` must be nonnegative and ``eta_vacuum`` strictly negative,
    so the interface row appears once.  With ``epsilon`` the interface curve
    ``x2 = epsilon phi(theta)`` is attached.
    """
    eta_p = np.atleast_1d(np.asarray(eta_plasma, dtype=float))
    eta_v = np.atleast_1d(np.asarray(eta_vacuum, dtype=float))
    if np.any(eta_p < 0) or np.any(eta_v >= 0):
        raise ValueError("eta_plasma must be >= 0 and eta_vacuum < 0")
    n = grid.n_modes
    plasma = np.stack([_rows_to_physical(plasma_first_order(phi, root, cfg, e, grid), n) for e in eta_p], axis=1) \
        if eta_p.size else np.zeros((5, 0, n))
    vacuum = np.stack([_rows_to_physical(vacuum_first_order(phi, root, cfg, e, grid), n) for e in eta_v], axis=1) \
        if eta_v.size else np.zeros((3, 0, n))
    interface = None
    if epsilon is not None:
        interface = epsilon * _rows_to_physical(phi.coeffs, n)
    return FieldSnapshot(grid.theta.copy(), eta_p, eta_v, plasma, vacuum, interface, epsilon,
                         root.sigma)


def fit_decay_rate(etas, values) -> float:
    """Rate ``r`` of a log-linear fit ``max_theta |f| ~ exp(-r |eta|)``."""
    etas = np.abs(np.asarray(etas, dtype=float))
    mags = np.max(np.abs(np.asarray(values)), axis=-1)
    keep = mags > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two nonzero levels to fit a decay rate")
    return float(-np.polyfit(etas[keep], np.log(mags[keep]), 1)[0])


def decay_rates(snapshot: FieldSnapshot) -> dict[str, float]:
    """Fitted decay rate of each nonzero field component."""
    out = {}
    for i, name in enumerate(PLASMA_NAMES):
        if np.any(snapshot.plasma[i]):
            out[name] = fit_decay_rate(snapshot.eta_plasma, snapshot.plasma[i])
    for i, name in enumerate(VACUUM_NAMES):
        if np.any(snapshot.vacuum[i]):
            out[name] = fit_decay_rate(snapshot.eta_vacuum, snapshot.vacuum[i])
    return out


def pressure_sensitivity(phi: AmplitudeState, root: DispersionRoot, cfg: PhysicalConfig, grid: SpectralGrid,
                         shift: float) -> tuple[float, float]:
    """Pressure-jump residual after shifting the phase velocity, with the predicted dispersion residual."""
    moved = root_at(root.phase_velocity + shift, cfg, root)
    return float(jump_residuals(phi, moved, cfg, grid)[3]), dispersion_residual(moved.phase_velocity, cfg)
