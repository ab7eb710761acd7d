"""Transfer-matrix zeros, thermodynamics and Bethe roots of the twisted XYZ chain."""
from __future__ import annotations

from .bae import BetheState, DegeneratePoint, degenerate_eta, match_spectrum, solve_bae
from .elliptic import EllipticParams, Regime
from .exceptions import ConfigError, ParameterError, XYZChainError
from .model import BoundaryTwist, SpinChainModel, hamiltonian, transfer_matrix
from .spectrum import LambdaEvaluator, StateChoice, diagonalize, select_states
from .thermo import Parity, energy_density, evaluate, excitation_gap, surface_energy
from .zeros import ZeroSet, energy_from_zeros, find_zeros

__all__ = [
    "BetheState",
    "BoundaryTwist",
    "ConfigError",
    "DegeneratePoint",
    "EllipticParams",
    "LambdaEvaluator",
    "ParameterError",
    "Parity",
    "Regime",
    "SpinChainModel",
    "StateChoice",
    "XYZChainError",
    "ZeroSet",
    "degenerate_eta",
    "diagonalize",
    "energy_density",
    "energy_from_zeros",
    "evaluate",
    "excitation_gap",
    "find_zeros",
    "hamiltonian",
    "match_spectrum",
    "select_states",
    "solve_bae",
    "surface_energy",
    "transfer_matrix",
]
