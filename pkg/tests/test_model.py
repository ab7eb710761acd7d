"""Tests for the R-matrix, transfer matrix and Hamiltonian."""
from __future__ import annotations

import math

import numpy as np
import pytest

from xyzchain.elliptic import EllipticParams
from xyzchain.exceptions import ParameterError
from xyzchain.model import (
    BoundaryTwist,
    SpinChainModel,
    couplings,
    hamiltonian,
    hamiltonian_from_transfer,
    hamiltonian_symmetry_residuals,
    qybe_residual,
    r_matrix,
    transfer_matrix,
    twist_operator,
    xxz_couplings,
    z2_residual,
)

PERMUTATION = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def test_r_matrix_regular_at_zero(params):
    np.testing.assert_allclose(r_matrix(0.0, params), PERMUTATION, atol=1e-14)


def test_yang_baxter_and_z2(params):
    assert qybe_residual(0.11 + 0.03j, -0.07 + 0.05j, 0.19 - 0.02j, params) < 1e-10
    assert z2_residual(0.23 - 0.04j, params) < 1e-12


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_transfer_matrices_commute(params, twist):
    model = SpinChainModel(4, params, twist)
    t_u = transfer_matrix(0.17 + 0.06j, model)
    t_v = transfer_matrix(-0.28 + 0.11j, model)
    scale = np.linalg.norm(t_u) * np.linalg.norm(t_v)
    assert np.linalg.norm(t_u @ t_v - t_v @ t_u) / scale < 1e-10

    u_op = twist_operator(twist, 4).toarray()
    assert np.linalg.norm(t_u @ u_op - u_op @ t_u) / np.linalg.norm(t_u) < 1e-10


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_shift_operator_power(params, twist):
    """t(0) is the twisted shift, so its N-th power is U^beta."""
    model = SpinChainModel(4, params, twist)
    power = np.linalg.matrix_power(transfer_matrix(0.0, model), 4)
    np.testing.assert_allclose(power, twist_operator(twist, 4).toarray(), atol=1e-10)


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_transfer_matrix_is_normal(real_params, twist):
    """At real eta the adjoint of t(u) is a unit multiple of t(-u* - eta)."""
    model = SpinChainModel(4, real_params, twist)
    u = 0.21 + 0.13j
    adjoint = transfer_matrix(u, model).conj().T
    crossed = transfer_matrix(-u.conjugate() - real_params.eta, model)
    factor = np.vdot(crossed, adjoint) / np.vdot(crossed, crossed)
    assert np.linalg.norm(adjoint - factor * crossed) / np.linalg.norm(adjoint) < 1e-9
    assert abs(factor) == pytest.approx(1.0, rel=1e-8)
    assert np.linalg.norm(adjoint @ adjoint.conj().T - adjoint.conj().T @ adjoint) < 1e-9 * np.linalg.norm(adjoint) ** 2


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_twist_operator_squares_to_identity(twist):
    u_op = twist_operator(twist, 3).toarray()
    square = u_op @ u_op
    np.testing.assert_allclose(square, np.eye(8), atol=1e-14)


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_hamiltonian_from_transfer(params, twist):
    model = SpinChainModel(4, params, twist)
    direct = hamiltonian(model).toarray()
    rebuilt = hamiltonian_from_transfer(model)
    assert np.max(np.abs(rebuilt - direct)) / np.linalg.norm(direct, 2) < 1e-6


def test_hamiltonian_is_hermitian_with_real_couplings(params):
    ham = hamiltonian(SpinChainModel(5, params, BoundaryTwist.Y)).toarray()
    np.testing.assert_allclose(ham, ham.conj().T, atol=1e-12)
    assert couplings(params).is_real


def test_hamiltonian_symmetries(chain4):
    residuals = hamiltonian_symmetry_residuals(chain4)
    assert residuals["reflection"] < 1e-10
    assert residuals["shift"] < 1e-10


def test_easy_axis():
    assert couplings(EllipticParams(1.6j, 1.0j)).easy_axis == "z"
    assert couplings(EllipticParams(0.6j, 0.7)).easy_axis != "z"


def test_twist_parsing():
    assert BoundaryTwist.from_text("0") is BoundaryTwist.PERIODIC
    assert BoundaryTwist.from_text(" X ") is BoundaryTwist.X
    with pytest.raises(ParameterError):
        BoundaryTwist.from_text("w")


def test_inhomogeneities_must_match_axis(real_params, imag_params):
    with pytest.raises(ParameterError):
        SpinChainModel(3, real_params, inhomogeneities=(0.1, 0.0, 0.0))
    with pytest.raises(ParameterError):
        SpinChainModel(3, imag_params, inhomogeneities=(0.1j, 0.0, 0.0))
    with pytest.raises(ParameterError):
        SpinChainModel(3, real_params, inhomogeneities=(0.1j,))


@pytest.mark.parametrize("eta", [0.3, 0.7])
def test_couplings_reduce_to_xxz_at_large_tau(eta):
    """With q = exp(-6 pi) the corrections are far below the tolerance."""
    limit = couplings(EllipticParams(6j, eta))
    xxz = xxz_couplings(eta)
    assert xxz.jx == xxz.jy == 1.0
    assert complex(xxz.jz) == pytest.approx(math.cos(math.pi * eta))
    for got, want in ((limit.jx, xxz.jx), (limit.jy, xxz.jy), (limit.jz, xxz.jz)):
        assert complex(got) == pytest.approx(complex(want), rel=1e-6, abs=1e-6)
