"""Theta functions with characteristics and the elliptic helpers built on them."""
from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .const import (
    SERIES_MAX_TERMS,
    SERIES_MIN_TERMS,
    SERIES_STOP_RUN,
    SERIES_TOL,
    SIGN_REGION_ATOL,
)
from .exceptions import ConvergenceError, DomainError, ParameterError, PoleError

_LOGGER = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]

_STRIP_ATOL = 1e-12
_LATTICE_ATOL = 1e-13


class Regime(enum.Enum):
    """Crossing-parameter regime."""

    REAL_LARGE = "real_large"
    REAL_SMALL = "real_small"
    IMAG_LARGE = "imag_large"
    IMAG_SMALL = "imag_small"

    @property
    def is_real(self) -> bool:
        """Return True for real crossing parameter."""
        return self in (Regime.REAL_LARGE, Regime.REAL_SMALL)

    @property
    def is_large(self) -> bool:
        """Return True above the half-period."""
        return self in (Regime.REAL_LARGE, Regime.IMAG_LARGE)


@dataclass(frozen=True)
class ThetaChar:
    """Characteristic [a, b] of a theta function."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a not in (0.0, 0.5) or self.b not in (0.0, 0.5):
            raise ParameterError(f"Unsupported characteristic [{self.a}, {self.b}]")


SIGMA_CHAR = ThetaChar(0.5, 0.5)
EVEN_CHAR = ThetaChar(0.0, 0.5)


def _series(
    char: ThetaChar,
    u: ComplexLike,
    modulus: complex,
    tol: float,
    max_terms: int,
    order: int,
) -> ComplexLike:
    """
    Sum the theta series (or its first u-derivative) over a symmetric window.

    The window m in [-M, M] grows until SERIES_STOP_RUN consecutive shells
    fall below tol times the accumulated term magnitude.

    Args:
        char: Characteristic [a, b]
        u: Argument, scalar or array
        modulus: Modulus with positive imaginary part
        tol: Relative truncation tolerance
        max_terms: Cap on M
        order: 0 for the function, 1 for the derivative

    Returns:
        Series value with the shape of u

    Raises:
        ConvergenceError: If the cap is reached first
    """
    modulus = complex(modulus)
    if modulus.imag <= 0:
        raise ParameterError(f"Modulus must have positive imaginary part, got {modulus}")
    if not 0 < tol <= 1e-8:
        raise ParameterError(f"Series tolerance {tol} outside (0, 1e-8]")

    scalar = np.ndim(u) == 0
    shifted = np.asarray(u, dtype=complex) + char.b

    def shell(m: int) -> np.ndarray:
        n = m + char.a
        term = np.exp(1j * math.pi * n * n * modulus + 2j * math.pi * n * shifted)
        if order:
            term = term * (2j * math.pi * n)
        return term

    total = shell(0)
    magnitude = np.abs(total)
    quiet = 0
    contrib = total
    for m in range(1, max_terms + 1):
        contrib = shell(m) + shell(-m)
        total = total + contrib
        magnitude = magnitude + np.abs(contrib)
        if np.all(np.abs(contrib) <= tol * np.maximum(magnitude, np.finfo(float).tiny)):
            quiet += 1
            if quiet >= SERIES_STOP_RUN:
                return complex(total) if scalar else total
        else:
            quiet = 0

    last = float(np.max(np.abs(contrib)))
    raise ConvergenceError(
        f"Theta series [{char.a}, {char.b}] did not converge in {max_terms} terms",
        last_term=last,
    )


def theta(
    char: ThetaChar,
    u: ComplexLike,
    modulus: complex,
    tol: float = SERIES_TOL,
    max_terms: int = SERIES_MAX_TERMS,
) -> ComplexLike:
    """Return theta[a, b](u, modulus)."""
    return _series(char, u, modulus, tol, max_terms, order=0)


def theta_prime(
    char: ThetaChar,
    u: ComplexLike,
    modulus: complex,
    tol: float = SERIES_TOL,
    max_terms: int = SERIES_MAX_TERMS,
) -> ComplexLike:
    """Return the u-derivative of theta[a, b](u, modulus), summed termwise."""
    return _series(char, u, modulus, tol, max_terms, order=1)


def sigma(u: ComplexLike, tau: complex, tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS) -> ComplexLike:
    """Return sigma(u) = theta[1/2, 1/2](u, tau)."""
    return theta(SIGMA_CHAR, u, tau, tol, max_terms)


def sigma_prime(u: ComplexLike, tau: complex, tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS) -> ComplexLike:
    """Return sigma'(u)."""
    return theta_prime(SIGMA_CHAR, u, tau, tol, max_terms)


def on_lattice(u: complex, tau: complex, atol: float = _LATTICE_ATOL) -> bool:
    """Return True if u lies on Z + Z tau."""
    u = complex(u)
    n_tau = round(u.imag / tau.imag)
    rest = u - n_tau * tau
    n_one = round(rest.real)
    return abs(rest - n_one) < atol


def zeta_fn(u: ComplexLike, tau: complex, tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS) -> ComplexLike:
    """
    Return zeta(u) = sigma'(u) / sigma(u).

    Raises:
        PoleError: If u is a lattice point
    """
    for point in np.atleast_1d(np.asarray(u, dtype=complex)).ravel():
        if on_lattice(point, tau):
            raise PoleError(f"zeta has a pole at {point}")
    return sigma_prime(u, tau, tol, max_terms) / sigma(u, tau, tol, max_terms)


def sign_region(gamma: complex) -> int:
    """Return the sign of Im(gamma), with |Im| below round-off counted as zero."""
    imag = complex(gamma).imag
    if abs(imag) < SIGN_REGION_ATOL:
        return 0
    return 1 if imag > 0 else -1


def _log_coth_shift(x: float, sign: int) -> complex:
    """Return log(coth(x) - sign) for real x != 0 without forming coth(x) - 1."""
    if sign == 0:
        magnitude = -math.log(math.tanh(abs(x)))
    else:
        # coth(x) - s = 2 s / expm1(2 s x)
        t = 2 * sign * x
        log_expm1 = t + math.log(-math.expm1(-t)) if t > 0 else math.log(-math.expm1(t))
        magnitude = math.log(2.0) - log_expm1
    return complex(magnitude, math.pi if x < 0 else 0.0)


def _check_a_strip(gamma: complex, tau: complex) -> complex:
    gamma = complex(gamma)
    if abs(gamma.imag) > 1 + _STRIP_ATOL or abs(gamma.real) > tau.imag / 2 + _STRIP_ATOL:
        raise DomainError(f"gamma={gamma} outside the A-strip for tau={tau}")
    return gamma


def _check_b_strip(gamma: complex, tau: complex) -> complex:
    gamma = complex(gamma)
    if abs(gamma.imag) > tau.imag + _STRIP_ATOL or abs(gamma.real) > 0.5 + _STRIP_ATOL:
        raise DomainError(f"gamma={gamma} outside the B-strip for tau={tau}")
    return gamma


def fourier_A_log(gamma: complex, k: int, tau: complex) -> complex:
    """
    Return the complex logarithm of fourier_A(gamma, k, tau) for k != 0.

    Finite where the coefficient itself over- or underflows.

    Raises:
        DomainError: If gamma is outside the A-strip
        ParameterError: If k is 0
    """
    gamma = _check_a_strip(gamma, tau)
    if k == 0:
        raise ParameterError("The k=0 coefficient has no logarithmic form")
    x = k * math.pi / tau.imag  # i k pi / tau
    return complex(math.log(math.pi), math.pi) - 2j * x * gamma + _log_coth_shift(x, sign_region(gamma))


def fourier_B_log(gamma: complex, k: int, tau: complex) -> complex:
    """
    Return the complex logarithm of fourier_B(gamma, k, tau) for k != 0.

    Raises:
        DomainError: If gamma is outside the B-strip
        ParameterError: If k is 0
    """
    gamma = _check_b_strip(gamma, tau)
    if k == 0:
        raise ParameterError("The k=0 coefficient has no logarithmic form")
    # coth(i k pi tau) = -coth(k pi Im tau)
    y = k * math.pi * tau.imag
    return complex(math.log(math.pi), -math.pi / 2) - 2j * math.pi * k * gamma + _log_coth_shift(y, sign_region(gamma))


def fourier_A(gamma: complex, k: int, tau: complex) -> complex:
    """
    Closed-form Fourier coefficient of A_gamma on the period [-tau/2i, tau/2i].

    Raises:
        DomainError: If gamma is outside Im in [-1, 1], Re in [-tau/2i, tau/2i]
    """
    gamma = _check_a_strip(gamma, tau)
    if k == 0:
        return math.pi * (2j * gamma + sign_region(gamma))
    return cmath.exp(fourier_A_log(gamma, k, tau))


def fourier_B(gamma: complex, k: int, tau: complex) -> complex:
    """
    Closed-form Fourier coefficient of B_gamma on the period [-1/2, 1/2].

    Raises:
        DomainError: If gamma is outside Im in [-tau/i, tau/i], Re in [-1/2, 1/2]
    """
    gamma = _check_b_strip(gamma, tau)
    if k == 0:
        return sign_region(gamma) * 1j * math.pi
    return cmath.exp(fourier_B_log(gamma, k, tau))


def a_function(gamma: complex, x: ComplexLike, tau: complex) -> ComplexLike:
    """Return A_gamma(x) = zeta(i(x - gamma)) - (2 pi / tau) x, periodic in x with period tau/i."""
    x = np.asarray(x, dtype=complex)
    u = 1j * (x - gamma)
    return sigma_prime(u, tau) / sigma(u, tau) - (2 * math.pi / tau) * x


def b_function(gamma: complex, x: ComplexLike, tau: complex) -> ComplexLike:
    """Return B_gamma(x) = zeta(x - gamma), periodic in x with period 1."""
    u = np.asarray(x, dtype=complex) - gamma
    return sigma_prime(u, tau) / sigma(u, tau)


@dataclass(frozen=True)
class EllipticParams:
    """Modulus tau, crossing parameter eta and series controls."""

    tau: complex
    eta: complex
    series_tol: float = SERIES_TOL
    max_terms: int = SERIES_MAX_TERMS
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        tau = complex(self.tau)
        eta = complex(self.eta)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "eta", eta)

        if tau.imag <= 0 or tau.real != 0:
            raise ParameterError(f"tau must be pure imaginary with Im(tau) > 0, got {tau}")
        if not 0 < self.series_tol <= 1e-8:
            raise ParameterError(f"series_tol {self.series_tol} outside (0, 1e-8]")
        if self.max_terms < SERIES_MIN_TERMS:
            raise ParameterError(f"max_terms must be >= {SERIES_MIN_TERMS}")
        if not self.strict:
            return

        if eta.imag == 0:
            if not 0 < eta.real < 1:
                raise ParameterError(f"Real eta must lie in (0, 1), got {eta.real}")
        elif eta.real == 0:
            if not 0 < eta.imag < tau.imag:
                raise ParameterError(f"Imaginary eta must satisfy 0 < Im(eta) < Im(tau), got {eta}")
        else:
            raise ParameterError(f"eta must be real or pure imaginary, got {eta}")

    @property
    def tau_im(self) -> float:
        """Return Im(tau)."""
        return self.tau.imag

    @property
    def is_real_eta(self) -> bool:
        """Return True if eta is real."""
        return self.eta.imag == 0

    @property
    def eta_scale(self) -> float:
        """Return eta for real eta, Im(eta) otherwise."""
        return self.eta.real if self.is_real_eta else self.eta.imag

    @property
    def regime(self) -> Regime:
        """Return the regime tag; the half-period itself belongs to the small branch."""
        if self.is_real_eta:
            return Regime.REAL_LARGE if self.eta.real > 0.5 else Regime.REAL_SMALL
        return Regime.IMAG_LARGE if self.eta.imag > self.tau_im / 2 else Regime.IMAG_SMALL

    def sigma(self, u: ComplexLike) -> ComplexLike:
        """Return sigma(u) at this modulus."""
        return sigma(u, self.tau, self.series_tol, self.max_terms)

    def sigma_prime(self, u: ComplexLike) -> ComplexLike:
        """Return sigma'(u) at this modulus."""
        return sigma_prime(u, self.tau, self.series_tol, self.max_terms)

    def zeta(self, u: ComplexLike) -> ComplexLike:
        """Return zeta(u) at this modulus."""
        return zeta_fn(u, self.tau, self.series_tol, self.max_terms)

    def theta(self, char: ThetaChar, u: ComplexLike, modulus: complex | None = None) -> ComplexLike:
        """Return theta[a, b](u, modulus), defaulting to tau."""
        return theta(char, u, self.tau if modulus is None else modulus, self.series_tol, self.max_terms)

    @property
    def energy_scale(self) -> complex:
        """Return sigma(eta) / sigma'(0)."""
        return self.sigma(self.eta) / self.sigma_prime(0.0)
