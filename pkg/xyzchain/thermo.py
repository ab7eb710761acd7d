"""Thermodynamic-limit energies, zero densities and finite-size fits."""
from __future__ import annotations

import cmath
import enum
import logging
import math
import os
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterable, Mapping, NamedTuple, Sequence

import mpmath
import numpy as np

from .const import (
    BAND_EDGE_ATOL,
    BOUNDARY_CONTINUITY_TOL,
    DENSITY_KMAX,
    DENSITY_SINGULAR_ATOL,
    ENV_KMAX_CAP,
    THERMO_KMAX_CAP,
    THERMO_REAL_TOL,
    THERMO_TERM_TOL,
)
from .elliptic import EllipticParams, Regime, fourier_A, fourier_A_log, fourier_B, fourier_B_log, sign_region
from .exceptions import (
    ConfigError,
    ConvergenceError,
    FitError,
    ImaginaryResidueError,
    ParameterError,
    SingularModeError,
)
from .model import BoundaryTwist

_LOGGER = logging.getLogger(__name__)

_QUIET_RUN = 3
AUTO = "auto"


class Parity(enum.Enum):
    """Parity of the number of sites."""

    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of(cls, n_sites: int) -> Parity:
        """Return the parity of n_sites."""
        return cls.EVEN if n_sites % 2 == 0 else cls.ODD

    @property
    def sign(self) -> int:
        """Return (-1)^N."""
        return 1 if self is Parity.EVEN else -1


class BandPosition(enum.Enum):
    """Where a discrete zero sits relative to the energy band."""

    INSIDE = "in_band"
    EDGE = "band_edge"
    OUTSIDE = "out_of_band"


class SeriesValue(NamedTuple):
    """A certified series value."""

    value: complex
    kmax: int
    tail: float


@dataclass(frozen=True)
class DiscreteZeroEnergy:
    """Energy carried by one discrete zero."""

    w: complex
    value: float
    position: BandPosition
    kmax: int
    tail: float


@dataclass(frozen=True)
class ThermoResult:
    """Thermodynamic-limit quantities at one parameter point."""

    energy_density: float
    discrete_zero_energies: dict[str, float]
    surface_energies: dict[str, float]
    gap: float
    kmax_used: int
    tail_estimate: float


@dataclass(frozen=True)
class ZeroDensity:
    """Fourier coefficients of the bulk-zero density."""

    coefficients: dict[int, complex]
    regime: Regime
    twist: BoundaryTwist
    discrete: tuple[complex, ...]
    n_sites: int
    period: float
    paired: bool = field(default=False)

    def __call__(self, x: float | np.ndarray) -> np.ndarray:
        """Return rho(x) from the truncated Fourier series."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=complex)
        for k, coeff in self.coefficients.items():
            total = total + coeff * np.exp(2j * math.pi * k * x / self.period)
        return total / self.period

    @property
    def integral(self) -> float:
        """Return the integral of rho over one period."""
        return float(self.coefficients[0].real)

    @property
    def zero_count(self) -> float:
        """Return the number of zeros accounted for: bulk (doubled for pairs) plus discrete."""
        per_bulk = 2 if self.paired else 1
        return per_bulk * self.n_sites * self.integral + len(self.discrete)


class FitResult(NamedTuple):
    """Least-squares fit E_N = slope N + intercept + curvature / N."""

    slope: float
    intercept: float
    curvature: float
    residual: float


def kmax_cap() -> int:
    """
    Return the series cap, honoring the EV_KMAX_CAP environment override.

    Raises:
        ConfigError: If the override is not a positive integer
    """
    raw = os.environ.get(ENV_KMAX_CAP)
    if raw is None:
        return THERMO_KMAX_CAP
    try:
        cap = int(raw)
    except ValueError as err:
        raise ConfigError(f"{ENV_KMAX_CAP}={raw!r} is not an integer") from err
    if cap <= 0:
        raise ConfigError(f"{ENV_KMAX_CAP} must be positive, got {cap}")
    return cap


def _certified_sum(term, first: int, kmax: int | str = AUTO) -> SeriesValue:
    """
    Sum term(k) for k = first, first + 1, ... up to a cap.

    The sum stops once three consecutive terms fall below THERMO_TERM_TOL
    times the partial sum. The cap is kmax itself, or kmax_cap() for "auto".

    Raises:
        ConvergenceError: If the cap is reached first
    """
    cap = kmax_cap() if kmax == AUTO else int(kmax)
    total = 0j
    quiet = 0
    last = math.inf
    for k in range(first, cap + 1):
        value = term(k)
        total += value
        last = abs(value)
        if last <= THERMO_TERM_TOL * max(abs(total), 1e-300):
            quiet += 1
            if quiet >= _QUIET_RUN:
                return SeriesValue(total, k, last)
        else:
            quiet = 0
    raise ConvergenceError(f"Series not converged within kmax={cap}", last_term=last, tail=last)


def _regime_for(params: EllipticParams, regime: Regime | None) -> Regime:
    actual = params.regime
    if regime is None or regime is actual:
        return actual
    on_boundary = (params.is_real_eta and params.eta.real == 0.5) or (
        not params.is_real_eta and params.eta.imag == params.tau_im / 2
    )
    if on_boundary and regime.is_real == actual.is_real:
        return regime
    raise ParameterError(f"Regime {regime.value} does not match eta={params.eta}, tau={params.tau}")


def _real(value: complex, what: str) -> float:
    scale = max(1.0, abs(value))
    if abs(value.imag) > THERMO_REAL_TOL * scale:
        raise ImaginaryResidueError(f"{what} has imaginary residue {value.imag:.3e}", residue=abs(value.imag))
    return value.real


def _cosh_over_sinh(a: float, x: float) -> float:
    """Return cosh(a) / sinh(x) for x > |a| without overflow."""
    return (math.exp(a - x) + math.exp(-a - x)) / (1 - math.exp(-2 * x))


def _cos_over_cosh(z: complex, y: float) -> complex:
    """Return cos(z) / cosh(y) for |Im z| <= y without overflow."""
    return (cmath.exp(1j * z - y) + cmath.exp(-1j * z - y)) / (1 + math.exp(-2 * y))


def energy_density(params: EllipticParams, regime: Regime | None = None, kmax: int | str = AUTO) -> float:
    """Return the ground-state energy per site in the thermodynamic limit."""
    return _energy_density(params, regime, kmax)[0]


def _energy_density(params: EllipticParams, regime: Regime | None, kmax: int | str) -> tuple[float, SeriesValue]:
    regime = _regime_for(params, regime)
    scale = complex(params.energy_scale)
    if regime.is_real:
        eta = params.eta.real
        step = math.pi / params.tau_im

        def term(k: int) -> float:
            x = k * step
            return 2 * math.tanh(x * eta) * _cosh_over_sinh(x * (2 * eta - 1), x)

        series = _certified_sum(term, 1, kmax)
        # k = 0 limit of tanh(x eta) / sinh(x)
        total = eta + series.value
        value = -scale * step * total - 0.5 * complex(params.sigma_prime(params.eta)) / complex(params.sigma_prime(0.0))
    else:
        e, t = params.eta.imag, params.tau_im

        def term(k: int) -> float:
            return math.tanh(k * math.pi * e) * _cosh_over_sinh(k * math.pi * (2 * e - t), k * math.pi * t)

        series = _certified_sum(term, 1, kmax)
        value = scale * (2j * math.pi * series.value - 0.5 * complex(params.zeta(params.eta)))
    return _real(complex(value), "Energy density"), series


def band_position(w: complex, params: EllipticParams) -> BandPosition:
    """Classify Im(w) against the band [-eta/2, eta/2] in domain units."""
    half = params.eta_scale / 2
    distance = abs(complex(w).imag) - half
    if abs(distance) < BAND_EDGE_ATOL:
        return BandPosition.EDGE
    return BandPosition.INSIDE if distance < 0 else BandPosition.OUTSIDE


def _band_weight(w: complex, params: EllipticParams, position: BandPosition) -> float:
    if position is BandPosition.EDGE:
        return 0.5
    half = 1j * params.eta_scale / 2
    return 0.5 * (sign_region(w + half) - sign_region(w - half))


def _frequency(params: EllipticParams) -> float:
    """Return a with the discrete-zero series sum_k cos(2 a k w) / cosh(a k eta_d)."""
    return math.pi / params.tau_im if params.is_real_eta else math.pi


def _accelerated_series(w: complex, params: EllipticParams) -> SeriesValue:
    """Sum the band-edge series with Shanks extrapolation of the partial sums."""
    a = mpmath.mpf(_frequency(params))
    eta_d = mpmath.mpf(params.eta_scale)
    w_mp = mpmath.mpc(w.real, w.imag)
    with mpmath.workdps(30):
        value, error = mpmath.nsum(
            lambda k: mpmath.cos(2 * a * k * w_mp) / mpmath.cosh(a * k * eta_d),
            [1, mpmath.inf],
            method="shanks",
            error=True,
        )
    return SeriesValue(complex(value), -1, float(error))


def discrete_zero_series(w: complex, params: EllipticParams, kmax: int | str = AUTO) -> DiscreteZeroEnergy:
    """
    Return the energy of a discrete zero at domain coordinate w with its diagnostics.

    Out-of-band zeros carry no energy; band-edge zeros get half weight and an
    accelerated series.
    """
    w = complex(w)
    position = band_position(w, params)
    if position is BandPosition.OUTSIDE:
        _LOGGER.debug("Discrete zero %s lies outside the band", w)
        return DiscreteZeroEnergy(w, 0.0, position, 0, 0.0)
    weight = _band_weight(w, params, position)
    if weight == 0:
        return DiscreteZeroEnergy(w, 0.0, position, 0, 0.0)

    a, eta_d = _frequency(params), params.eta_scale
    if position is BandPosition.EDGE:
        _LOGGER.warning("Discrete zero %s sits on the band edge; using accelerated summation", w)
        series = _accelerated_series(w, params)
    else:
        series = _certified_sum(lambda k: _cos_over_cosh(2 * a * k * w, a * k * eta_d), 1, kmax)
    total = 1 + 2 * series.value

    scale = complex(params.energy_scale)
    if params.is_real_eta:
        prefactor = scale * math.pi / params.tau_im
    else:
        prefactor = -1j * math.pi * scale
    value = _real(weight * prefactor * total, f"Discrete-zero energy at {w}")
    return DiscreteZeroEnergy(w, value, position, series.kmax, series.tail)


def discrete_zero_energy(w: complex, params: EllipticParams, regime: Regime | None = None, kmax: int | str = AUTO) -> float:
    """Return the energy induced by a discrete zero at domain coordinate w."""
    _regime_for(params, regime)
    return discrete_zero_series(w, params, kmax).value


def boundary_point(params: EllipticParams) -> complex:
    """Return the boundary location of a real discrete zero: tau/2i or 1/2."""
    return complex(params.tau_im / 2) if params.is_real_eta else 0.5 + 0j


def surface_energy(
    params: EllipticParams,
    regime: Regime | None,
    twist: BoundaryTwist,
    parity: Parity,
    kmax: int | str = AUTO,
) -> float:
    """
    Return the surface energy of a twisted boundary relative to the periodic chain.

    Raises:
        ParameterError: For the periodic boundary
    """
    regime = _regime_for(params, regime)
    if twist is BoundaryTwist.PERIODIC:
        raise ParameterError("Surface energy is defined for twisted boundaries only")
    free_axis = BoundaryTwist.X if regime.is_real else BoundaryTwist.Z
    if twist is free_axis:
        return 0.0
    edge = discrete_zero_series(boundary_point(params), params, kmax).value
    return parity.sign * edge


def gap_is_finite(regime: Regime, twist: BoundaryTwist, parity: Parity) -> bool:
    """Return True for the twist/parity cells with a finite excitation gap."""
    if regime.is_real:
        even_cell = (BoundaryTwist.PERIODIC, BoundaryTwist.X)
    else:
        even_cell = (BoundaryTwist.PERIODIC, BoundaryTwist.Z)
    return (twist in even_cell) == (parity is Parity.EVEN)


def gap_branches(params: EllipticParams, kmax: int | str = AUTO) -> tuple[float, float]:
    """Return the (small-branch, large-branch) gap formulas at the same parameters."""
    edge = boundary_point(params)
    if params.is_real_eta:
        offset = 1j * (params.eta.real - 0.5)
    else:
        offset = 1j * (params.eta.imag - params.tau_im / 2)
    small = 2 * discrete_zero_series(edge, params, kmax).value
    large = discrete_zero_series(edge + offset, params, kmax).value + discrete_zero_series(edge - offset, params, kmax).value
    return small, large


def excitation_gap(
    params: EllipticParams,
    regime: Regime | None,
    twist: BoundaryTwist,
    parity: Parity,
    kmax: int | str = AUTO,
) -> float:
    """Return the excitation gap; zero for the gapless twist/parity cells."""
    regime = _regime_for(params, regime)
    if not gap_is_finite(regime, twist, parity):
        return 0.0
    small, large = gap_branches(params, kmax)
    return large if regime.is_large else small


def boundary_continuity(params: EllipticParams, kmax: int | str = AUTO) -> float:
    """
    Return |small branch - large branch| of the gap at the regime boundary.

    Raises:
        ParameterError: If params are not at eta = 1/2 or eta = tau/2
    """
    on_boundary = (params.is_real_eta and params.eta.real == 0.5) or (
        not params.is_real_eta and abs(params.eta.imag - params.tau_im / 2) < 1e-15
    )
    if not on_boundary:
        raise ParameterError(f"eta={params.eta} is not a regime boundary")
    small, large = gap_branches(params, kmax)
    difference = abs(small - large)
    if difference > BOUNDARY_CONTINUITY_TOL:
        _LOGGER.warning("Gap branches differ by %.3e at the regime boundary", difference)
    return difference


def _ground_discrete(regime: Regime, twist: BoundaryTwist, parity: Parity) -> int:
    """Return how many boundary discrete zeros the ground state carries."""
    if regime.is_real:
        plain = (BoundaryTwist.PERIODIC, BoundaryTwist.X)
    else:
        plain = (BoundaryTwist.PERIODIC, BoundaryTwist.Z)
    odd_carries = twist in plain
    return int(odd_carries == (parity is Parity.ODD))


def ground_state_energy_estimate(
    params: EllipticParams, regime: Regime | None, twist: BoundaryTwist, n_sites: int, kmax: int | str = AUTO
) -> float:
    """Return e N plus the boundary discrete-zero energy the ground state carries."""
    regime = _regime_for(params, regime)
    density = energy_density(params, regime, kmax)
    if _ground_discrete(regime, twist, Parity.of(n_sites)):
        return density * n_sites + discrete_zero_series(boundary_point(params), params, kmax).value
    return density * n_sites


def first_excited_energy_estimate(
    params: EllipticParams, regime: Regime | None, twist: BoundaryTwist, n_sites: int, kmax: int | str = AUTO
) -> float:
    """Return the ground estimate plus the gap of this twist/parity cell."""
    ground = ground_state_energy_estimate(params, regime, twist, n_sites, kmax)
    return ground + excitation_gap(params, regime, twist, Parity.of(n_sites), kmax)


@dataclass(frozen=True)
class BoundaryCheck:
    """Variational check that a real discrete zero prefers the boundary."""

    argmin: float
    minimum: float
    boundary_value: float
    at_boundary: bool


def boundary_minimizer(params: EllipticParams, samples: int = 41, kmax: int | str = AUTO) -> BoundaryCheck:
    """Scan E^w over real w in [0, half period] and report where it is smallest."""
    half = boundary_point(params).real
    grid = np.linspace(0.0, half, samples)
    energies = np.array([discrete_zero_series(complex(x), params, kmax).value for x in grid])
    idx = int(np.argmin(energies))
    return BoundaryCheck(
        argmin=float(grid[idx]),
        minimum=float(energies[idx]),
        boundary_value=float(energies[-1]),
        at_boundary=idx == samples - 1,
    )


def _density_terms(params: EllipticParams, regime: Regime) -> tuple[list[complex], list[complex]]:
    """Return the gamma lists of the bulk numerator and the denominator."""
    if regime.is_real:
        eta_i = 1j * params.eta.real
        numerator = [eta_i, -eta_i]
        if regime.is_large:
            half = 1j * (1 - params.eta.real) / 2
            return numerator, [-half, half]
        return numerator, [1.5 * eta_i, -1.5 * eta_i, 0.5 * eta_i, -0.5 * eta_i]
    eta = params.eta
    numerator = [eta, -eta]
    if regime.is_large:
        half = (params.tau - eta) / 2
        return numerator, [-half, half]
    return numerator, [1.5 * eta, -1.5 * eta, 0.5 * eta, -0.5 * eta]


def zero_density(
    params: EllipticParams,
    regime: Regime | None,
    twist: BoundaryTwist,
    discrete: Sequence[complex],
    k: int,
) -> tuple[complex, complex]:
    """
    Return (bulk, correction) with N rho(k) = N bulk + correction.

    At k = 0 every transform combination has a finite part that cancels
    when the balance relations hold, leaving the ratio of the 1/k poles.

    Raises:
        SingularModeError: If the k = 0 finite parts do not cancel, or a
            denominator vanishes at k != 0
    """
    regime = _regime_for(params, regime)
    tau = params.tau
    transform = fourier_A if regime.is_real else fourier_B
    log_transform = fourier_A_log if regime.is_real else fourier_B_log
    numerator_g, denominator_g = _density_terms(params, regime)
    half = 1j * params.eta_scale / 2 if regime.is_real else params.eta / 2
    discrete_g = [g for w in discrete for g in (complex(w) + half, complex(w) - half)]

    def combo(gammas: Iterable[complex], kk: int) -> complex:
        return sum(transform(g, kk, tau) for g in gammas)

    if regime.is_real:
        shift = -4j * math.pi * sum(complex(w) for w in discrete)
        offset = 2 * math.pi * (twist.delta_y + twist.delta_z) if not regime.is_large else 0.0
    else:
        shift = 0.0
        offset = -2j * math.pi * (twist.delta_x + twist.delta_y) if not regime.is_large else 0.0

    if k == 0:
        finite = {
            "denominator": combo(denominator_g, 0),
            "bulk": combo(numerator_g, 0),
            "correction": combo(discrete_g, 0) + shift + offset,
        }
        worst = max(abs(v) for v in finite.values())
        if worst > DENSITY_SINGULAR_ATOL * max(1.0, abs(tau)):
            raise SingularModeError(f"k=0 finite parts do not cancel: {finite}", k=0)
        count = len(denominator_g)
        return len(numerator_g) / count, -len(discrete_g) / count

    # coefficients grow like exp(2 pi |k| Im gamma / period); normalize by the largest denominator term
    scale = max(log_transform(g, k, tau).real for g in denominator_g)

    def scaled(gammas: Iterable[complex]) -> complex:
        return sum(cmath.exp(log_transform(g, k, tau) - scale) for g in gammas)

    denominator = scaled(denominator_g)
    if abs(denominator) < DENSITY_SINGULAR_ATOL:
        raise SingularModeError(f"Density denominator vanishes at k={k}", k=k)
    bulk = scaled(numerator_g) / denominator
    correction = -scaled(discrete_g) / denominator
    return bulk, correction


def density_profile(
    params: EllipticParams,
    twist: BoundaryTwist,
    discrete: Sequence[complex],
    n_sites: int,
    kmax: int = DENSITY_KMAX,
) -> ZeroDensity:
    """Return the truncated Fourier series of the bulk-zero density."""
    regime = params.regime
    coefficients = {}
    for k in range(-kmax, kmax + 1):
        bulk, correction = zero_density(params, regime, twist, discrete, k)
        coefficients[k] = complex(bulk) + complex(correction) / n_sites
    period = params.tau_im if regime.is_real else 1.0
    return ZeroDensity(
        coefficients=coefficients,
        regime=regime,
        twist=twist,
        discrete=tuple(complex(w) for w in discrete),
        n_sites=n_sites,
        period=period,
        paired=not regime.is_large,
    )


def evaluate(
    params: EllipticParams,
    twist: BoundaryTwist,
    parity: Parity,
    kmax: int | str = AUTO,
) -> ThermoResult:
    """Assemble every thermodynamic quantity at one parameter point."""
    density, series = _energy_density(params, None, kmax)
    edge = discrete_zero_series(boundary_point(params), params, kmax)
    surfaces = {
        axis.value: surface_energy(params, None, axis, parity, kmax)
        for axis in (BoundaryTwist.X, BoundaryTwist.Y, BoundaryTwist.Z)
    }
    gap = excitation_gap(params, None, twist, parity, kmax)
    return ThermoResult(
        energy_density=density,
        discrete_zero_energies={"boundary": edge.value},
        surface_energies=surfaces,
        gap=gap,
        kmax_used=max(series.kmax, edge.kmax),
        tail_estimate=max(series.tail, edge.tail),
    )


SWEEP_HEADER = ("regime", "twist", "parity", "eta_re", "eta_im", "tau_im", "e_density", "E_surface", "gap", "kmax", "tail")


def _sweep_row(task: tuple[EllipticParams, BoundaryTwist, Parity, int | str]) -> dict[str, object]:
    params, twist, parity, kmax = task
    result = evaluate(params, twist, parity, kmax)
    surface = 0.0 if twist is BoundaryTwist.PERIODIC else result.surface_energies[twist.value]
    return {
        "regime": params.regime.value,
        "twist": twist.value,
        "parity": parity.value,
        "eta_re": params.eta.real,
        "eta_im": params.eta.imag,
        "tau_im": params.tau_im,
        "e_density": result.energy_density,
        "E_surface": surface,
        "gap": result.gap,
        "kmax": result.kmax_used,
        "tail": result.tail_estimate,
    }


def sweep(
    points: Iterable[EllipticParams],
    twists: Sequence[BoundaryTwist],
    parities: Sequence[Parity],
    kmax: int | str = AUTO,
    workers: int = 1,
) -> list[dict[str, object]]:
    """
    Return one CSV row per (point, twist, parity), in input order.

    Args:
        points: Parameter points of the sweep
        twists: Twists evaluated at each point
        parities: Parities evaluated at each point
        kmax: Series cap or AUTO
        workers: Size of the process pool; 1 evaluates in-process
    """
    tasks = [(params, twist, parity, kmax) for params in points for twist in twists for parity in parities]
    if workers > 1 and len(tasks) > 1:
        with Pool(workers) as pool:
            rows = pool.map(_sweep_row, tasks)
    else:
        rows = [_sweep_row(task) for task in tasks]
    _LOGGER.info("Swept %d thermodynamic points on %d worker(s)", len(rows), workers)
    return rows


def extrapolate(energies: Mapping[int, float], parity: Parity | None = None) -> FitResult:
    """
    Fit E_N = slope N + intercept + curvature / N by least squares.

    Raises:
        FitError: With fewer than three sizes or a rank-deficient design
    """
    sizes = sorted(n for n in energies if parity is None or Parity.of(n) is parity)
    if len(sizes) < 3:
        raise FitError(f"Need at least three sizes of matching parity, got {sizes}")
    n = np.asarray(sizes, dtype=float)
    design = np.column_stack([n, np.ones_like(n), 1.0 / n])
    target = np.asarray([energies[size] for size in sizes], dtype=float)
    solution, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 3:
        raise FitError(f"Rank-deficient fit (rank {rank}) for sizes {sizes}")
    residual = float(np.linalg.norm(design @ solution - target))
    return FitResult(float(solution[0]), float(solution[1]), float(solution[2]), residual)
