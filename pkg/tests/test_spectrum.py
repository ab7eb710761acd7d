"""Tests for the joint diagonalization and Lambda evaluators."""
from __future__ import annotations

import numpy as np
import pytest

from xyzchain.const import PROBE_POINT
from xyzchain.exceptions import DegeneracyContaminationError, ParameterError
from xyzchain.model import BoundaryTwist, SpinChainModel, couplings, hamiltonian
from xyzchain.spectrum import (
    LambdaEvaluator,
    SpectrumRecord,
    StateChoice,
    diagonalize,
    lambda_of,
    select_states,
    spectrum_summary,
    transfer_eigenstates,
)


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_diagonalize_matches_dense_spectrum(params, twist):
    model = SpinChainModel(4, params, twist)
    records = diagonalize(model)
    assert len(records) == 16
    energies = np.array([rec.energy for rec in records])
    assert np.all(np.diff(energies) >= -1e-10)
    np.testing.assert_allclose(energies, np.linalg.eigvalsh(hamiltonian(model).toarray()), atol=1e-9)
    assert {rec.twist_charge for rec in records} <= {1, -1}


def test_states_are_joint_eigenvectors(chain4):
    for record in diagonalize(chain4):
        evaluator = LambdaEvaluator(chain4, record.state)
        assert evaluator.quality() < 1e-6


def test_select_states(chain4):
    records = diagonalize(chain4)
    ground = select_states(records, StateChoice.GROUND)
    first = select_states(records, "first")
    assert ground.energy == min(rec.energy for rec in records)
    assert first.energy >= ground.energy
    summary = spectrum_summary(records)
    assert summary["states"] == 16
    assert summary["gap"] == pytest.approx(first.energy - ground.energy)


def test_select_states_needs_records():
    with pytest.raises(ParameterError):
        select_states([], "ground")


def test_lambda_of_rejects_mixed_state(chain4):
    records = diagonalize(chain4)
    mixed = records[0].state + records[-1].state
    mixed = mixed / np.linalg.norm(mixed)
    with pytest.raises(DegeneracyContaminationError):
        lambda_of(LambdaEvaluator(chain4, mixed), 0.21 + 0.05j)


def test_lambda_at_zero_is_unit_modulus(ground4):
    """t(0) is a unitary twisted shift."""
    assert abs(lambda_of(ground4, 0.0)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_transfer_eigenstates_inhomogeneous(real_params, twist):
    model = SpinChainModel(3, real_params, twist, (0.02j, -0.031j, 0.047j))
    evaluators = transfer_eigenstates(model)
    assert len(evaluators) == 8
    for evaluator in evaluators:
        assert evaluator.quality() < 1e-6


def _toy(energies, groups, lambdas=None):
    lambdas = lambdas or [None] * len(energies)
    return [
        SpectrumRecord(index=i, energy=e, twist_charge=1, state=np.zeros(1), degeneracy_group=g, lambda_ref=lam)
        for i, (e, g, lam) in enumerate(zip(energies, groups, lambdas))
    ]


def test_first_excited_inside_degenerate_ground_level():
    records = _toy([-3.0, -3.0, 1.0], [0, 0, 1])
    first = select_states(records, StateChoice.FIRST_EXCITED)
    assert first.index == 1
    assert first.energy == -3.0
    assert first.intra_multiplet
    assert not select_states(records, StateChoice.GROUND).intra_multiplet


def test_first_excited_is_next_level():
    records = _toy([-3.0, -1.0, -1.0, 5.0], [0, 1, 1, 2])
    assert select_states(records, "ground").energy == -3.0
    first = select_states(records, "first")
    assert first.energy == -1.0
    assert first.index == 1
    assert not first.intra_multiplet


def test_spin_flip_image_of_the_ground_is_skipped():
    """Lambda and -Lambda share their zeros, so the image is not an excitation."""
    records = _toy([-3.0, -3.0, -3.0, 1.0], [0, 0, 0, 1], [2.0 + 1.0j, -2.0 - 1.0j, 0.5j, 4.0])
    first = select_states(records, "first")
    assert first.index == 2
    assert first.intra_multiplet
    only_image = _toy([-3.0, -3.0, 1.0], [0, 0, 1], [2.0 + 1.0j, -2.0 - 1.0j, 4.0])
    first = select_states(only_image, "first")
    assert first.index == 2
    assert not first.intra_multiplet


def test_records_carry_lambda_at_reference_point(chain4):
    for record in diagonalize(chain4):
        expected = LambdaEvaluator(chain4, record.state).values([PROBE_POINT])[0]
        assert record.lambda_ref == pytest.approx(complex(expected), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize(("n_sites", "twist"), [(4, BoundaryTwist.X), (4, BoundaryTwist.Y), (5, BoundaryTwist.Z), (5, BoundaryTwist.PERIODIC)])
def test_twisted_levels_come_in_spin_flip_pairs(real_params, n_sites, twist):
    """A global spin flip maps t(u) to -t(u), or pairs t-eigenvalues at odd N without twist."""
    records = diagonalize(SpinChainModel(n_sites, real_params, twist))
    ground = select_states(records, "ground")
    members = [rec for rec in records if rec.degeneracy_group == ground.degeneracy_group and rec.index != ground.index]
    assert any(rec.same_zero_set(ground) for rec in members)
    first = select_states(records, "first")
    assert not first.same_zero_set(ground)


def test_two_site_spectrum_closed_form(real_params):
    cpl = couplings(real_params)
    jx, jy, jz = cpl.jx.real, cpl.jy.real, cpl.jz.real
    periodic = [rec.energy for rec in diagonalize(SpinChainModel(2, real_params))]
    expected = sorted([jz + jx - jy, jz - jx + jy, -jz + jx + jy, -jz - jx - jy])
    np.testing.assert_allclose(periodic, expected, atol=1e-10)

    twisted = [rec.energy for rec in diagonalize(SpinChainModel(2, real_params, BoundaryTwist.Z))]
    np.testing.assert_allclose(twisted, sorted([jz, jz, -jz, -jz]), atol=1e-10)
