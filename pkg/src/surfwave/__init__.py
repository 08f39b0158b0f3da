"""Weakly nonlinear surface waves on a plasma-vacuum interface.

Submodules: :mod:`dispersion`, :mod:`kernels`, :mod:`spectral`,
:mod:`solver`, :mod:`fields`, :mod:`analysis`, :mod:`cli`.
"""

from .dispersion import DispersionRoot, PhysicalConfig, Regime, find_roots
from .solver import Formulation, SolverConfig, run
from .spectral import AmplitudeState, SpectralGrid

__all__ = ["AmplitudeState", "DispersionRoot", "Formulation", "PhysicalConfig", "Regime", "SolverConfig",
           "SpectralGrid", "find_roots", "run"]
__version__ = "0.1.0"
