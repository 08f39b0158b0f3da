"""Surface-wave dispersion relation: roots, regime classification, derived constants.

The phase velocity ``lam`` of a linear surface wave solves

    (lam - v1)^2 - b1^2 = h1^2 * sqrt(1 - nu^2 lam^2),   nu |lam| < 1.

The left side is a parabola in ``lam`` and the right side a half-ellipse, so
the residual ``f = parabola - ellipse`` is strictly convex on
``[-1/nu, 1/nu]`` and has at most two roots there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

SCAN_SAMPLES = 4096
CASE_TOL = 1e-12
DOUBLE_ROOT_TOL = 1e-8
PREFACTOR_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the subluminal range ``nu |lam| <= 1``."""


class DegeneratePrefactorError(ArithmeticError):
    """The time-derivative prefactor of the amplitude equation vanishes."""


class Regime(str, enum.Enum):
    NO_ROOT = "NoRoot"
    BOUNDARY_ROOT = "BoundaryRoot"
    ONE_ROOT = "OneRoot"
    TWO_ROOTS = "TwoRoots"
    DOUBLE_ROOT = "DoubleRoot"


class Case(enum.IntEnum):
    """Which inequality between ``|b1|`` and ``|v1| +- 1/nu`` the background satisfies."""

    NO_REAL_ROOT = 1      # |b1| > |v1| + 1/nu
    BOUNDARY = 2          # |b1| = |v1| + 1/nu
    ALWAYS_ROOTS = 3      # |v1| - 1/nu <= |b1| < |v1| + 1/nu
    THRESHOLD = 4         # |b1| < |v1| - 1/nu


@dataclass(frozen=True)
class PhysicalConfig:
    """Background state of the flat interface.

    ``v1`` is the tangential plasma velocity, ``b1`` the plasma magnetic
    field (Alfven units), ``h1`` the vacuum magnetic field and ``nu`` the
    ratio of the reference speed to the speed of light.
    """

    v1: float
    b1: float
    h1: float
    nu: float

    def __post_init__(self):
        for name in ("v1", "b1", "h1", "nu"):
            val = getattr(self, name)
            if not isinstance(val, (int, float, np.floating, np.integer)) or not math.isfinite(val):
                raise ValueError(f"{name} must be a finite real, got {val!r}")
            object.__setattr__(self, name, float(val))
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    @property
    def light_bound(self) -> float:
        """Largest admissible ``|lam|``, namely ``1/nu``."""
        return 1.0 / self.nu

    def case(self) -> Case:
        gap_hi = abs(self.b1) - (abs(self.v1) + self.light_bound)
        if abs(gap_hi) <= CASE_TOL:
            return Case.BOUNDARY
        if gap_hi > 0:
            return Case.NO_REAL_ROOT
        if abs(self.b1) < abs(self.v1) - self.light_bound:
            return Case.THRESHOLD
        return Case.ALWAYS_ROOTS


@dataclass(frozen=True)
class DispersionRoot:
    phase_velocity: float
    sigma: float
    discriminant: float
    regime: Regime
    rescale: float

    @property
    def usable(self) -> bool:
        """True when the root can drive the amplitude equation."""
        return (self.regime not in (Regime.NO_ROOT, Regime.BOUNDARY_ROOT)
                and self.sigma > 0 and self.discriminant != 0 and math.isfinite(self.rescale))


def sigma_of(lam: float, nu: float) -> float:
    """``sqrt(1 - nu^2 lam^2)``; exactly 0 on the light cone ``nu |lam| = 1``."""
    x = nu * lam
    if abs(x) > 1.0:
        raise DomainError(f"nu*|lambda| = {abs(x):.17g} exceeds 1")
    if abs(x) == 1.0:
        return 0.0
    return math.sqrt((1.0 - x) * (1.0 + x))


def plasma_discriminant(lam: float, cfg: PhysicalConfig) -> float:
    return (lam - cfg.v1) ** 2 - cfg.b1 ** 2


def dispersion_residual(lam: float, cfg: PhysicalConfig) -> float:
    return plasma_discriminant(lam, cfg) - cfg.h1 ** 2 * sigma_of(lam, cfg.nu)


def _residual_array(lam: np.ndarray, cfg: PhysicalConfig) -> np.ndarray:
    x = cfg.nu * lam
    sig = np.sqrt(np.clip((1.0 - x) * (1.0 + x), 0.0, None))
    return (lam - cfg.v1) ** 2 - cfg.b1 ** 2 - cfg.h1 ** 2 * sig


def prefactor(lam: float, sigma: float, discriminant: float, cfg: PhysicalConfig) -> float:
    """Coefficient of the time derivative before rescaling to the canonical equation."""
    return 2.0 * (lam - cfg.v1) / discriminant + cfg.nu ** 2 * lam / sigma ** 2


def time_rescale_factor(root: DispersionRoot | float, cfg: PhysicalConfig) -> float:
    """Factor ``c`` such that ``tau_canonical = c * tau`` yields the canonical kernel.

    ``c = -(1 + sigma) / A`` with ``A`` from :func:`prefactor`.  Accepts a
    :class:`DispersionRoot` or a bare phase velocity.
    """
    lam = root.phase_velocity if isinstance(root, DispersionRoot) else float(root)
    sig = sigma_of(lam, cfg.nu)
    disc = plasma_discriminant(lam, cfg)
    if sig == 0.0:
        raise DomainError("sigma vanishes on the light cone; no rescaling exists")
    if disc == 0.0:
        raise DegeneratePrefactorError("plasma discriminant d vanishes")
    a = prefactor(lam, sig, disc, cfg)
    scale = 2.0 * abs(lam - cfg.v1) / abs(disc) + cfg.nu ** 2 * abs(lam) / sig ** 2
    if abs(a) <= PREFACTOR_TOL * max(scale, 1.0):
        raise DegeneratePrefactorError(f"time-derivative prefactor is degenerate (A = {a:.3e})")
    return -(1.0 + sig) / a


def _polish_near_light_cone(lam: float, cfg: PhysicalConfig) -> tuple[float, float]:
    """Re-solve for ``sigma`` instead of ``lam`` when the root grazes ``nu |lam| = 1``.

    There ``sigma(lam)`` has a huge slope, so one ulp in ``lam`` moves the
    residual far more than rounding does; in ``sigma`` the residual has slope
    about ``-h1^2`` and the root is well conditioned.
    """
    sig = sigma_of(lam, cfg.nu)
    if sig > 0.1 or cfg.h1 == 0.0:
        return lam, sig
    sign = math.copysign(1.0, lam)

    def g(s: float) -> float:
        return (sign * math.sqrt(1.0 - s * s) / cfg.nu - cfg.v1) ** 2 - cfg.b1 ** 2 - cfg.h1 ** 2 * s

    lo, hi = max(sig * 0.5, 0.0), min(sig * 1.5 + 1e-300, 1.0)
    if g(lo) * g(hi) > 0:
        return lam, sig
    sig = float(brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200))
    return sign * math.sqrt(1.0 - sig * sig) / cfg.nu, sig


def _make_root(lam: float, regime: Regime, cfg: PhysicalConfig) -> DispersionRoot:
    sig = sigma_of(lam, cfg.nu)
    if regime in (Regime.ONE_ROOT, Regime.TWO_ROOTS):
        lam, sig = _polish_near_light_cone(lam, cfg)
    disc = plasma_discriminant(lam, cfg)
    rescale = math.nan
    # A = f'(lam) / d, so the prefactor vanishes identically at a tangency
    if regime not in (Regime.BOUNDARY_ROOT, Regime.DOUBLE_ROOT):
        try:
            rescale = time_rescale_factor(lam, cfg)
        except (DegeneratePrefactorError, DomainError):
            pass
    return DispersionRoot(lam, sig, disc, regime, rescale)


def _scan_grid(cfg: PhysicalConfig, samples: int) -> np.ndarray:
    edge = cfg.light_bound - CASE_TOL / cfg.nu
    return np.linspace(-edge, edge, samples)


def _refined_minimum(cfg: PhysicalConfig, lo: float, hi: float) -> tuple[float, float]:
    res = minimize_scalar(lambda x: dispersion_residual(x, cfg), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * max(1.0, cfg.light_bound)})
    return float(res.x), float(res.fun)


def _bracketed_root(cfg: PhysicalConfig, lo: float, hi: float) -> float:
    return float(brentq(dispersion_residual, lo, hi, args=(cfg,), xtol=1e-15, rtol=4 * np.finfo(float).eps,
                        maxiter=200))


def find_roots(cfg: PhysicalConfig, samples: int = SCAN_SAMPLES) -> list[DispersionRoot]:
    """All real dispersion roots with ``nu |lam| < 1``, tagged with their regime.

    Boundary configurations (``|b1| = |v1| + 1/nu``) return the light-cone
    root(s) tagged ``BoundaryRoot``.  A tangency without sign change is
    reported as a single ``DoubleRoot``.
    """
    if cfg.case() is Case.BOUNDARY:
        if cfg.v1 == 0.0:
            edges = (-cfg.light_bound, cfg.light_bound)
        else:
            edges = (-math.copysign(cfg.light_bound, cfg.v1),)
        return [_make_root(lam, Regime.BOUNDARY_ROOT, cfg) for lam in edges]

    lam = _scan_grid(cfg, samples)
    f = _residual_array(lam, cfg)
    positive = f > 0
    flips = np.flatnonzero(positive[:-1] != positive[1:])
    roots: list[float] = []
    if flips.size:
        roots = [_bracketed_root(cfg, lam[i], lam[i + 1]) if f[i] != 0 or f[i + 1] != 0 else float(lam[i])
                 for i in flips]
    else:
        i = int(np.argmin(f))
        lo, hi = lam[max(i - 1, 0)], lam[min(i + 1, lam.size - 1)]
        x_min, f_min = _refined_minimum(cfg, lo, hi)
        cell_ends_positive = dispersion_residual(lo, cfg) > 0 and dispersion_residual(hi, cfg) > 0
        if f_min < -DOUBLE_ROOT_TOL * cfg.h1 ** 2 and cell_ends_positive:
            # two roots hidden inside one scan cell
            roots = [_bracketed_root(cfg, lo, x_min), _bracketed_root(cfg, x_min, hi)]
        elif abs(f_min) <= DOUBLE_ROOT_TOL * cfg.h1 ** 2 and cfg.h1 != 0.0 and cell_ends_positive:
            return [_make_root(x_min, Regime.DOUBLE_ROOT, cfg)]
    unique: list[float] = []
    for r in sorted(roots):
        if not unique or abs(r - unique[-1]) > 1e-12 * max(1.0, abs(r)):
            unique.append(r)
    if len(unique) == 1 and len(roots) == 2:
        return [_make_root(unique[0], Regime.DOUBLE_ROOT, cfg)]
    regime = {0: Regime.NO_ROOT, 1: Regime.ONE_ROOT}.get(len(unique), Regime.TWO_ROOTS)
    return [_make_root(r, regime, cfg) for r in unique]


def classify(cfg: PhysicalConfig) -> Regime:
    """Regime of the configuration as a whole."""
    roots = find_roots(cfg)
    return roots[0].regime if roots else Regime.NO_ROOT


def minimum_residual(cfg: PhysicalConfig) -> tuple[float, float]:
    """Location and value of the minimum of the (convex) residual on the subluminal interval."""
    lam = _scan_grid(cfg, SCAN_SAMPLES)
    i = int(np.argmin(_residual_array(lam, cfg)))
    return _refined_minimum(cfg, lam[max(i - 1, 0)], lam[min(i + 1, lam.size - 1)])


def double_root_threshold(cfg: PhysicalConfig, rtol: float = 1e-14) -> float:
    """Field strength ``|h1| = H*`` at which two roots merge, for threshold-case backgrounds.

    Found by bisection on ``|h1|``: below ``H*`` the residual minimum is
    positive, above it negative.
    """
    if cfg.case() is not Case.THRESHOLD:
        raise ValueError("a double-root threshold exists only when |b1| < |v1| - 1/nu")

    def min_at(h: float) -> float:
        return minimum_residual(PhysicalConfig(cfg.v1, cfg.b1, h, cfg.nu))[1]

    lo, hi = 0.0, 1.0
    while min_at(hi) > 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if min_at(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def select_root(roots: list[DispersionRoot], index: int) -> DispersionRoot:
    """Pick ``roots[index]`` and insist that it is usable for simulation."""
    if not roots:
        raise DomainError("configuration has no real dispersion root")
    if not 0 <= index < len(roots):
        raise IndexError(f"root index {index} out of range for {len(roots)} root(s)")
    root = roots[index]
    if not root.usable:
        raise DomainError(f"root {index} ({root.regime.value}) cannot drive the amplitude equation")
    return root
