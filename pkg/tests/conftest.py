"""Shared fixtures for the xyzchain tests."""
from __future__ import annotations

import pytest

from xyzchain.elliptic import EllipticParams
from xyzchain.model import SpinChainModel
from xyzchain.spectrum import LambdaEvaluator, diagonalize, select_states


@pytest.fixture
def real_params() -> EllipticParams:
    """Real crossing parameter in the large branch."""
    return EllipticParams(0.6j, 0.7)


@pytest.fixture
def imag_params() -> EllipticParams:
    """Imaginary crossing parameter in the large branch."""
    return EllipticParams(1.6j, 1.0j)


@pytest.fixture
def small_real_params() -> EllipticParams:
    """Real crossing parameter in the small branch."""
    return EllipticParams(0.6j, 0.3)


@pytest.fixture
def small_imag_params() -> EllipticParams:
    """Imaginary crossing parameter in the small branch."""
    return EllipticParams(1.6j, 0.4j)


@pytest.fixture(params=["real", "real_small", "imag", "imag_small"])
def params(request, real_params, small_real_params, imag_params, small_imag_params) -> EllipticParams:
    """One point in every regime."""
    return {
        "real": real_params,
        "real_small": small_real_params,
        "imag": imag_params,
        "imag_small": small_imag_params,
    }[request.param]


@pytest.fixture
def chain4(params) -> SpinChainModel:
    """Periodic four-site chain."""
    return SpinChainModel(4, params)


@pytest.fixture
def ground4(chain4) -> LambdaEvaluator:
    """Lambda evaluator on the four-site ground state."""
    record = select_states(diagonalize(chain4), "ground")
    return LambdaEvaluator(chain4, record.state)
