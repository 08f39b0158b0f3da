"""Named initial interface profiles."""

from __future__ import annotations

import numpy as np

from .spectral import AmplitudeState, SpectralGrid, random_bandlimited, single_mode, to_spectral

PRESETS = ("cosine", "sine", "gaussian-bump", "random-bandlimited")


def cosine(grid: SpectralGrid, amplitude: float = 1.0, mode: int = 1) -> AmplitudeState:
    """``amplitude * cos(k_mode theta)``."""
    return single_mode(grid, mode, 0.5 * amplitude)


def sine(grid: SpectralGrid, amplitude: float = 1.0, mode: int = 1) -> AmplitudeState:
    """``amplitude * sin(k_mode theta)``."""
    return single_mode(grid, mode, -0.5j * amplitude)


def gaussian_bump(grid: SpectralGrid, amplitude: float = 1.0, width: float | None = None) -> AmplitudeState:
    """Periodized Gaussian centred in the cell, truncated to ``|j| <= N/3`` with zero mean."""
    width = grid.length / 10.0 if width is None else width
    if width <= 0:
        raise ValueError("width must be positive")
    offsets = grid.theta - 0.5 * grid.length
    images = np.arange(-2, 3)[:, None] * grid.length
    values = amplitude * np.exp(-((offsets[None, :] + images) / width) ** 2).sum(axis=0)
    c = to_spectral(values, grid).coeffs.copy()
    c[np.abs(grid.j) > grid.n_modes // 3] = 0.0
    c[0] = 0.0
    return AmplitudeState(c)


def build_profile(name: str, grid: SpectralGrid, seed: int = 0, **params) -> AmplitudeState:
    """Dispatch on a preset name; unknown names or parameters raise ``ValueError``."""
    key = name.lower().replace("_", "-")
    try:
        if key == "cosine":
            return cosine(grid, **params)
        if key == "sine":
            return sine(grid, **params)
        if key == "gaussian-bump":
            return gaussian_bump(grid, **params)
        if key == "random-bandlimited":
            rng = np.random.default_rng(seed)
            amplitude = params.pop("amplitude", 1.0)
            state = random_bandlimited(grid, rng, **params)
            return state.scaled(amplitude)
    except TypeError as exc:
        raise ValueError(f"bad parameters for profile {name!r}: {exc}") from None
    raise ValueError(f"unknown profile {name!r}; choose from {PRESETS}")
