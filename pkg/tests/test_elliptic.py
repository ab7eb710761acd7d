"""Tests for the theta and sigma functions."""
from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from xyzchain.elliptic import (
    EVEN_CHAR,
    EllipticParams,
    Regime,
    ThetaChar,
    a_function,
    b_function,
    fourier_A,
    fourier_A_log,
    fourier_B,
    fourier_B_log,
    sigma,
    sign_region,
    zeta_fn,
)
from xyzchain.exceptions import DomainError, ParameterError, PoleError

POINTS = np.array([0.13 + 0.07j, -0.31 + 0.11j, 0.42 - 0.2j, 0.05 + 0.26j])


def test_sigma_matches_jacobi_theta():
    """sigma(u) is -theta_1(pi u, q) with q = exp(i pi tau)."""
    tau = 0.6j
    q = mpmath.exp(1j * mpmath.pi * tau)
    for u in POINTS:
        expected = -complex(mpmath.jtheta(1, mpmath.pi * complex(u), q))
        assert complex(sigma(u, tau)) == pytest.approx(expected, rel=1e-12)


def test_even_theta_matches_jacobi_theta(real_params):
    """theta[0, 1/2](u) is theta_4(pi u, q)."""
    q = mpmath.exp(1j * mpmath.pi * real_params.tau)
    for u in POINTS:
        expected = complex(mpmath.jtheta(4, mpmath.pi * complex(u), q))
        assert complex(real_params.theta(EVEN_CHAR, u)) == pytest.approx(expected, rel=1e-12)


def test_sigma_odd_and_quasi_periodic(params):
    """sigma is odd, flips sign under u + 1 and picks up the tau multiplier."""
    tau = params.tau
    base = params.sigma(POINTS)
    np.testing.assert_allclose(params.sigma(-POINTS), -base, rtol=1e-13)
    np.testing.assert_allclose(params.sigma(POINTS + 1), -base, rtol=1e-12)
    multiplier = -np.exp(-2j * math.pi * (POINTS + tau / 2))
    np.testing.assert_allclose(params.sigma(POINTS + tau), multiplier * base, rtol=1e-12)


def test_zeta_pole_at_lattice_points(real_params):
    with pytest.raises(PoleError):
        zeta_fn(0.0, real_params.tau)
    with pytest.raises(PoleError):
        zeta_fn(1.0 + real_params.tau, real_params.tau)


def test_zeta_is_log_derivative(real_params):
    h = 1e-6
    u = 0.21 + 0.09j
    numeric = np.log(real_params.sigma(u + h) / real_params.sigma(u - h)) / (2 * h)
    assert complex(real_params.zeta(u)) == pytest.approx(complex(numeric), rel=1e-8)


@pytest.mark.parametrize("k", [-3, -1, 0, 1, 2, 3])
@pytest.mark.parametrize("gamma", [0.1 + 0.2j, -0.2 - 0.15j])
def test_fourier_B_against_quadrature(gamma, k):
    """The closed-form coefficients match the periodic trapezoid rule."""
    tau = 0.6j
    x = -0.5 + np.arange(512) / 512
    values = b_function(gamma, x, tau) * np.exp(-2j * math.pi * k * x)
    assert fourier_B(gamma, k, tau) == pytest.approx(complex(values.mean()), rel=1e-9, abs=1e-12)


def test_fourier_B_outside_strip():
    with pytest.raises(DomainError):
        fourier_B(0.7 + 0.1j, 1, 0.6j)


def test_unsupported_characteristic():
    with pytest.raises(ParameterError):
        ThetaChar(0.25, 0.5)


@pytest.mark.parametrize(
    ("tau", "eta"),
    [(0.6, 0.7), (0.6j, 1.2), (0.6j, 0.0), (0.6j, 0.3 + 0.1j), (1.6j, 1.7j), (0.6 + 0.6j, 0.3)],
)
def test_inadmissible_parameters(tau, eta):
    with pytest.raises(ParameterError):
        EllipticParams(tau, eta)


@pytest.mark.parametrize(
    ("tau", "eta", "regime"),
    [
        (0.6j, 0.7, Regime.REAL_LARGE),
        (0.6j, 0.3, Regime.REAL_SMALL),
        (0.6j, 0.5, Regime.REAL_SMALL),
        (1.6j, 1.0j, Regime.IMAG_LARGE),
        (1.6j, 0.4j, Regime.IMAG_SMALL),
    ],
)
def test_regime_tags(tau, eta, regime):
    params = EllipticParams(tau, eta)
    assert params.regime is regime
    assert params.regime.is_real == params.is_real_eta


def test_energy_scale_is_sigma_ratio(real_params):
    expected = real_params.sigma(0.7) / real_params.sigma_prime(0.0)
    assert complex(real_params.energy_scale) == pytest.approx(complex(expected))


@pytest.mark.parametrize("k", [-10, -4, -1, 0, 1, 2, 5, 10])
@pytest.mark.parametrize("gamma", [0.1 + 0.2j, -0.2 - 0.15j, 0.25 + 0.6j])
def test_fourier_A_against_quadrature(gamma, k):
    """The closed-form coefficients match the periodic trapezoid rule over [-tau/2i, tau/2i]."""
    tau = 0.6j
    period = tau.imag
    x = -period / 2 + period * np.arange(1024) / 1024
    values = a_function(gamma, x, tau) * np.exp(-2j * math.pi * k * x / period)
    assert fourier_A(gamma, k, tau) == pytest.approx(complex(period * values.mean()), abs=1e-8)


@pytest.mark.parametrize("k", [1, 3, 7])
@pytest.mark.parametrize("gamma", [0.1 + 0.2j, -0.2 - 0.15j, 0.12])
def test_fourier_A_conjugation_symmetry(gamma, k):
    tau = 0.6j
    assert fourier_A(gamma, k, tau).conjugate() == pytest.approx(-fourier_A(gamma.conjugate(), -k, tau), abs=1e-10)


def test_fourier_A_zero_mode(real_params):
    gamma = 0.1 + 0.35j
    assert fourier_A(gamma, 0, real_params.tau) == pytest.approx(math.pi * (2j * gamma + 1))


def test_fourier_logs_stay_finite_at_large_k():
    """exp(-2 i x gamma) alone overflows a double at k = 300; the coefficient itself underflows."""
    log_a = fourier_A_log(0.1 + 0.7j, 300, 0.6j)
    log_b = fourier_B_log(0.1 + 1.2j, -300, 1.6j)
    assert math.isfinite(log_a.real) and log_a.real < -700
    assert math.isfinite(log_b.real) and log_b.real < -700
    assert np.exp(fourier_A_log(0.1 + 0.2j, 2, 0.6j)) == pytest.approx(fourier_A(0.1 + 0.2j, 2, 0.6j))
    with pytest.raises(ParameterError):
        fourier_A_log(0.1, 0, 0.6j)


def test_fourier_A_outside_strip():
    with pytest.raises(DomainError):
        fourier_A(0.4 + 0.1j, 1, 0.6j)
    with pytest.raises(DomainError):
        fourier_A(0.1 + 1.2j, 1, 0.6j)


@pytest.mark.parametrize(
    ("gamma", "sign"),
    [(0.1 + 0.2j, 1), (0.3 - 0.1j, -1), (0.4, 0), (0.2 + 1e-15j, 0), (-0.5 - 2.0j, -1)],
)
def test_sign_region(gamma, sign):
    assert sign_region(gamma) == sign
