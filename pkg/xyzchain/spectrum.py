"""Joint eigenstates of H, the twist operator and t(u), and their Lambda(u)."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .const import (
    DEGENERACY_RTOL,
    EIGEN_RESIDUAL_TOL,
    FLIP_IMAGE_RTOL,
    LAMBDA_RESIDUAL_TOL,
    PHASE_FIX_ATOL,
    PROBE_POINT,
    ZERO_BATCH,
)
from .exceptions import DegeneracyContaminationError, EigenSolverError, ParameterError
from .model import (
    BoundaryTwist,
    SpinChainModel,
    apply_transfer,
    hamiltonian,
    transfer_norm_bound,
    twist_operator,
)

_LOGGER = logging.getLogger(__name__)

_DENSE_DIMENSION = 64
_CHARGE_ATOL = 1e-9


class StateChoice(enum.Enum):
    """Which low-lying state to pick."""

    GROUND = "ground"
    FIRST_EXCITED = "first"


@dataclass(frozen=True)
class SpectrumRecord:
    """One joint eigenstate of H and U^beta."""

    index: int
    energy: float
    twist_charge: int
    state: np.ndarray = field(repr=False, compare=False)
    degeneracy_group: int
    intra_multiplet: bool = False
    lambda_ref: complex | None = field(default=None, compare=False)

    def same_zero_set(self, other: SpectrumRecord) -> bool:
        """Return True if Lambda(u0) = +-Lambda_other(u0), i.e. both states share one zero set."""
        if self.lambda_ref is None or other.lambda_ref is None:
            return False
        ref = max(abs(other.lambda_ref), np.finfo(float).tiny)
        gap = min(abs(self.lambda_ref - other.lambda_ref), abs(self.lambda_ref + other.lambda_ref))
        return gap <= FLIP_IMAGE_RTOL * ref


@dataclass(frozen=True)
class LambdaEvaluator:
    """Evaluate the transfer-matrix eigenvalue on a fixed eigenstate."""

    model: SpinChainModel
    state: np.ndarray = field(repr=False, compare=False)

    def values(self, u_values: Sequence[complex] | np.ndarray, batch: int = ZERO_BATCH) -> np.ndarray:
        """Return Rayleigh quotients state^dagger t(u) state for many u, without residual checks."""
        u = np.atleast_1d(np.asarray(u_values, dtype=complex))
        out = np.empty(u.size, dtype=complex)
        conj = self.state.conj()
        for start in range(0, u.size, batch):
            chunk = u[start : start + batch]
            applied = apply_transfer(chunk, self.model, self.state)
            out[start : start + batch] = applied @ conj
        return out

    def residuals(self, u_values: Sequence[complex] | np.ndarray) -> np.ndarray:
        """Return |t(u) psi - Lambda psi| relative to a bound on |t(u)|."""
        u = np.atleast_1d(np.asarray(u_values, dtype=complex))
        applied = apply_transfer(u, self.model, self.state)
        lam = applied @ self.state.conj()
        defect = np.linalg.norm(applied - lam[:, None] * self.state[None, :], axis=1)
        return defect / transfer_norm_bound(u, self.model)

    def quality(self, probes: Sequence[complex] = (PROBE_POINT, 0.31 + 0.17j, -0.27 + 0.05j)) -> float:
        """Return the worst relative eigenvector residual over a few probe points."""
        return float(np.max(self.residuals(probes)))


def lambda_of(evaluator: LambdaEvaluator, u: complex) -> complex:
    """
    Return Lambda(u) as the Rayleigh quotient of t(u) on the evaluator state.

    Raises:
        DegeneracyContaminationError: If the state is not a t(u) eigenvector
    """
    residual = float(evaluator.residuals([u])[0])
    if residual > LAMBDA_RESIDUAL_TOL:
        raise DegeneracyContaminationError(
            f"State is not an eigenvector of t({u}): relative residual {residual:.3e}",
            residual=residual,
        )
    return complex(evaluator.values([u])[0])


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate so the first component above PHASE_FIX_ATOL is real positive."""
    big = np.flatnonzero(np.abs(vector) > PHASE_FIX_ATOL)
    if big.size == 0:
        return vector
    lead = vector[big[0]]
    return vector * (abs(lead) / lead)


def _group_levels(energies: np.ndarray) -> list[list[int]]:
    """Split sorted energies into degenerate groups."""
    groups: list[list[int]] = []
    for idx, energy in enumerate(energies):
        if groups:
            anchor = energies[groups[-1][0]]
            if abs(energy - anchor) < DEGENERACY_RTOL * max(1.0, abs(anchor)):
                groups[-1].append(idx)
                continue
        groups.append([idx])
    return groups


def _resolve_charge(block: np.ndarray, model: SpinChainModel, u_op) -> tuple[np.ndarray, np.ndarray]:
    """Rotate a degenerate block into U^beta eigenvectors; return (charges, vectors)."""
    if model.twist is BoundaryTwist.PERIODIC:
        return np.ones(block.shape[1], dtype=int), block
    small = block.conj().T @ (u_op @ block)
    small = 0.5 * (small + small.conj().T)
    values, rot = sla.eigh(small)
    charges = np.rint(values.real).astype(int)
    if np.any(np.abs(values - charges) > _CHARGE_ATOL) or np.any(np.abs(charges) != 1):
        raise EigenSolverError(f"U^{model.twist.value} block is not +-1 diagonalizable: eigenvalues {values}")
    return charges, block @ rot


def _resolve_transfer(block: np.ndarray, model: SpinChainModel) -> np.ndarray:
    """Rotate a block degenerate in (E, c) into eigenvectors of t(PROBE_POINT)."""
    if block.shape[1] == 1:
        return block
    applied = apply_transfer([PROBE_POINT], model, block)[0]
    small = block.conj().T @ applied
    values, rot = sla.eig(small)
    order = np.lexsort((values.imag, values.real))
    q, _ = np.linalg.qr(block @ rot[:, order])
    return q


def _eigensystem(ham, model: SpinChainModel, levels: int | None) -> tuple[np.ndarray, np.ndarray]:
    dim = model.dimension
    try:
        if levels is None or dim <= _DENSE_DIMENSION or levels + 8 >= dim:
            energies, vectors = sla.eigh(ham.toarray())
        else:
            energies, vectors = spla.eigsh(ham, k=levels + 8, which="SA")
            order = np.argsort(energies)
            energies, vectors = energies[order], vectors[:, order]
            # drop the trailing group, which may be cut in the middle
            groups = _group_levels(energies)
            keep = sum(len(g) for g in groups[:-1])
            energies, vectors = energies[:keep], vectors[:, :keep]
    except (sla.LinAlgError, spla.ArpackError) as err:
        raise EigenSolverError(f"Eigen-solver failed for N={model.n_sites}: {err}") from err
    return energies, vectors


def diagonalize(model: SpinChainModel, levels: int | None = None) -> list[SpectrumRecord]:
    """
    Jointly diagonalize H, U^beta and, inside residual degeneracies, t(u0).

    Args:
        model: Homogeneous spin chain
        levels: If given, only the lowest levels are computed with a sparse solver

    Returns:
        Records sorted by energy then twist charge

    Raises:
        EigenSolverError: On solver failure or a non +-1 twist block
    """
    ham = hamiltonian(model)
    energies, vectors = _eigensystem(ham, model, levels)
    u_op = twist_operator(model.twist, model.n_sites)

    records: list[SpectrumRecord] = []
    for group_id, group in enumerate(_group_levels(energies)):
        charges, block = _resolve_charge(vectors[:, group], model, u_op)
        for charge in sorted(set(charges.tolist())):
            sub = _resolve_transfer(block[:, charges == charge], model)
            at_point = apply_transfer([PROBE_POINT], model, sub)[0]
            for col in range(sub.shape[1]):
                column = sub[:, col]
                lambda_ref = complex(np.vdot(column, at_point[:, col]) / np.vdot(column, column))
                state = _fix_phase(column)
                state = state / np.linalg.norm(state)
                hpsi = ham @ state
                energy = float(np.vdot(state, hpsi).real)
                residual = float(np.linalg.norm(hpsi - energy * state))
                if residual > EIGEN_RESIDUAL_TOL * max(1.0, abs(energy)):
                    raise EigenSolverError(f"Eigenvector residual {residual:.3e} at E={energy}")
                records.append(
                    SpectrumRecord(
                        index=len(records),
                        energy=energy,
                        twist_charge=int(charge),
                        state=state,
                        degeneracy_group=group_id,
                        lambda_ref=lambda_ref,
                    )
                )

    _LOGGER.info(
        "Diagonalized N=%d twist=%s: %d states in %d levels",
        model.n_sites,
        model.twist.value,
        len(records),
        records[-1].degeneracy_group + 1 if records else 0,
    )
    return records


def select_states(records: Sequence[SpectrumRecord], which: StateChoice | str) -> SpectrumRecord:
    """
    Pick the ground or first excited state.

    When the ground level is degenerate the first excited state is the
    next member of the ground multiplet and is flagged intra_multiplet.
    Members whose Lambda is +-Lambda of the ground (the images under a
    global spin flip) share its zero set and are skipped.

    Raises:
        ParameterError: If there are fewer than two states
    """
    choice = StateChoice(which) if isinstance(which, str) else which
    if not records:
        raise ParameterError("No spectrum records to select from")
    ordered = sorted(records, key=lambda rec: (rec.energy, rec.index))
    ground = ordered[0]
    if choice is StateChoice.GROUND:
        return ground
    if len(ordered) < 2:
        raise ParameterError("First excited state needs at least two levels")

    partners = [
        rec
        for rec in ordered[1:]
        if rec.degeneracy_group == ground.degeneracy_group and not rec.same_zero_set(ground)
    ]
    if partners:
        _LOGGER.warning("Ground level at E=%.12g is degenerate; first excited state is intra-multiplet", ground.energy)
        return replace(partners[0], intra_multiplet=True)
    for rec in ordered[1:]:
        if rec.degeneracy_group != ground.degeneracy_group:
            return rec
    raise ParameterError("No level above the ground state")


def spectrum_summary(records: Sequence[SpectrumRecord]) -> dict[str, float | int]:
    """Return ground energy, first gap and state count for reporting."""
    ground = select_states(records, StateChoice.GROUND)
    first = select_states(records, StateChoice.FIRST_EXCITED)
    return {
        "states": len(records),
        "ground_energy": ground.energy,
        "first_excited_energy": first.energy,
        "gap": first.energy - ground.energy,
        "ground_charge": ground.twist_charge,
        "first_excited_charge": first.twist_charge,
    }


def transfer_eigenstates(model: SpinChainModel, probes: Sequence[complex] = (PROBE_POINT, 0.27 - 0.09j)) -> list[LambdaEvaluator]:
    """
    Return joint eigenvectors of t(u) and U^beta without building H.

    A generic combination of t at two probe points and U^beta is diagonalized;
    this also covers inhomogeneous chains, where H is not defined.

    Raises:
        EigenSolverError: On solver failure
        DegeneracyContaminationError: If a vector is not a t(u) eigenvector
    """
    dim = model.dimension
    identity = np.eye(dim, dtype=complex)
    first, second = apply_transfer(list(probes), model, identity)
    combined = first + (0.37 + 0.11j) * second + 0.23 * twist_operator(model.twist, model.n_sites).toarray()
    try:
        _, vectors = sla.eig(combined)
    except sla.LinAlgError as err:
        raise EigenSolverError(f"Transfer-matrix eigen-solver failed for N={model.n_sites}: {err}") from err

    evaluators = []
    for col in range(dim):
        state = _fix_phase(vectors[:, col])
        evaluator = LambdaEvaluator(model, state / np.linalg.norm(state))
        residual = float(np.max(evaluator.residuals(probes)))
        if residual > LAMBDA_RESIDUAL_TOL:
            raise DegeneracyContaminationError(
                f"Column {col} is not a joint t(u) eigenvector: relative residual {residual:.3e}",
                residual=residual,
            )
        evaluators.append(evaluator)
    _LOGGER.debug("Resolved %d transfer-matrix eigenstates for N=%d", len(evaluators), model.n_sites)
    return evaluators
