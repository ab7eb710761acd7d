"""Exceptions raised by xyzchain."""
from __future__ import annotations

from typing import Any


class XYZChainError(Exception):
    """Base error for the package."""


class ParameterError(XYZChainError):
    """Parameters outside the admissible regime."""


class ConfigError(ParameterError):
    """Invalid run configuration."""


class DomainError(XYZChainError):
    """Argument outside the strip a closed form is valid in."""


class PoleError(XYZChainError):
    """Evaluation at a pole."""


class ConvergenceError(XYZChainError):
    """Series or iteration did not converge within its cap."""

    def __init__(self, message: str, *, last_term: float = float("nan"), tail: float = float("nan")) -> None:
        super().__init__(message)
        self.last_term = last_term
        self.tail = tail


class HermiticityError(ParameterError):
    """Hamiltonian is not Hermitian within tolerance."""

    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class EigenSolverError(XYZChainError):
    """Eigen-solver failure or unresolvable symmetry block."""


class DegeneracyContaminationError(XYZChainError):
    """State is not an eigenvector of t(u) at the requested point."""

    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class ZeroCountError(XYZChainError):
    """Zero count of Lambda(u) could not be certified."""

    def __init__(self, message: str, *, winding: float, found: int) -> None:
        super().__init__(message)
        self.winding = winding
        self.found = found


class NewtonError(XYZChainError):
    """Newton refinement stagnated."""

    def __init__(self, message: str, *, seed: Any, trace: list[float] | None = None) -> None:
        super().__init__(message)
        self.seed = seed
        self.trace = trace or []


class IntegerRecoveryError(XYZChainError):
    """No integer pair satisfies the sum rule."""

    def __init__(self, message: str, *, defect: float) -> None:
        super().__init__(message)
        self.defect = defect


class ImaginaryResidueError(XYZChainError):
    """A quantity that must be real kept an imaginary part."""

    def __init__(self, message: str, *, residue: float) -> None:
        super().__init__(message)
        self.residue = residue


class SingularModeError(XYZChainError):
    """Vanishing denominator in a Fourier-space density equation."""

    def __init__(self, message: str, *, k: int) -> None:
        super().__init__(message)
        self.k = k


class FitError(XYZChainError):
    """Rank-deficient or underdetermined least-squares fit."""


class SingularJacobianError(XYZChainError):
    """Newton Jacobian is singular."""


class CoalescenceError(XYZChainError):
    """Two Bethe roots coincide."""


class PoleCancellationError(XYZChainError):
    """T-Q expression blows up at a Bethe root."""


class CertificationError(XYZChainError):
    """A result failed its numerical cross-check."""
