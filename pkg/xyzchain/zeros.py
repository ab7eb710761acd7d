"""Zeros of the transfer-matrix eigenvalue, their integer labels and patterns."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
from scipy import ndimage

from .const import (
    CAUCHY_RADIUS,
    DEDUPE_TOL,
    ENERGY_IMAG_TOL,
    NEWTON_MAX_ITER,
    NEWTON_POLISH,
    NEWTON_TOL,
    PARTNER_TOL,
    PATTERN_TOL,
    PROBE_POINT,
    SNAP_TOL,
    STRING_MAX_LENGTH,
    SUM_RULE_TOL,
    WINDING_MAX_STEP,
    WINDING_TOL,
    ZERO_GRID_FACTOR,
    ZERO_GRID_PAD,
    ZERO_GRID_REFINEMENTS,
)
from .elliptic import EllipticParams, Regime, sign_region
from .exceptions import (
    DegeneracyContaminationError,
    ImaginaryResidueError,
    IntegerRecoveryError,
    NewtonError,
    ZeroCountError,
)
from .model import BoundaryTwist, SpinChainModel, a_of, d_of, twist_operator
from .spectrum import LambdaEvaluator

_LOGGER = logging.getLogger(__name__)

_QUALITY_TOL = 1e-7
_MAX_HALVINGS = 10
_WINDING_REFINEMENTS = 6
_FLOOR = np.finfo(float).tiny
_TIE_ATOL = 1e-9

HALF_LINE = "half_line"
REAL_AXIS = "real_axis"
BOUNDARY_DISCRETE = "boundary_discrete"
ANOMALOUS = "anomalous"


class EtaAxis(enum.Enum):
    """Whether the crossing parameter is real or imaginary."""

    REAL = "real"
    IMAG = "imag"


@dataclass(frozen=True)
class FundamentalDomain:
    """
    Rectangle the zeros are reduced into.

    For real eta the domain coordinate is zbar = -i z with Re in [-tau/2i, tau/2i]
    and Im in [-1/2, 1/2]; for imaginary eta it is z itself with Re in
    [-1/2, 1/2] and Im in [-tau/2i, tau/2i]. Lambda(u) vanishes at u = z - eta/2.
    """

    axis: EtaAxis
    re_range: tuple[float, float]
    im_range: tuple[float, float]

    @classmethod
    def for_params(cls, params: EllipticParams) -> FundamentalDomain:
        """Return the domain matching the crossing-parameter axis."""
        half = params.tau_im / 2
        if params.is_real_eta:
            return cls(EtaAxis.REAL, (-half, half), (-0.5, 0.5))
        return cls(EtaAxis.IMAG, (-0.5, 0.5), (-half, half))

    @property
    def periods(self) -> tuple[float, float]:
        """Return the lattice periods along Re and Im."""
        return self.re_range[1] - self.re_range[0], self.im_range[1] - self.im_range[0]

    def to_native(self, w: complex | np.ndarray) -> complex | np.ndarray:
        """Map a domain coordinate to z."""
        return 1j * w if self.axis is EtaAxis.REAL else w

    def from_native(self, z: complex | np.ndarray) -> complex | np.ndarray:
        """Map z to the domain coordinate."""
        return -1j * z if self.axis is EtaAxis.REAL else z

    def canonicalize(self, w: complex) -> complex:
        """Reduce w into the domain, snapping the boundary to the positive side."""
        p_re, p_im = self.periods
        return complex(_reduce(w.real, p_re), _reduce(w.imag, p_im))

    def torus_distance(self, a: complex, b: complex) -> float:
        """Return |a - b| modulo the lattice."""
        p_re, p_im = self.periods
        diff = a - b
        d_re = diff.real - p_re * round(diff.real / p_re)
        d_im = diff.imag - p_im * round(diff.imag / p_im)
        return math.hypot(d_re, d_im)


def _reduce(x: float, period: float) -> float:
    """Reduce x into (-period/2, period/2] with SNAP_TOL snapping."""
    r = x - period * math.floor((x + period / 2) / period)
    if r < -period / 2 + SNAP_TOL:
        r += period
    if abs(r - period / 2) < SNAP_TOL:
        r = period / 2
    return r


@dataclass(frozen=True)
class StringParams:
    """Center x, length label n and parity nu of a conjugate pair."""

    x: float
    n: int
    nu: int


@dataclass(frozen=True)
class PatternReport:
    """Classification of a zero set into bulk and discrete zeros."""

    tags: tuple[str, ...]
    strings: tuple[StringParams, ...]
    max_deviation: float
    bulk_count: int
    discrete: tuple[complex, ...]
    in_band: tuple[complex, ...]
    edge_distances: tuple[float, ...]
    balance: dict[str, Any] = field(default_factory=dict)

    @property
    def census(self) -> dict[str, int]:
        """Return the number of in-band discrete zeros by type."""
        real = sum(1 for w in self.in_band if abs(w.imag) < PATTERN_TOL)
        return {"in_band": len(self.in_band), "real": real, "pairs": (len(self.in_band) - real) // 2}


@dataclass(frozen=True)
class ZeroSet:
    """N zeros of Lambda in domain coordinates, with labels once analyzed."""

    zeros: tuple[complex, ...]
    residuals: tuple[float, ...]
    domain: FundamentalDomain
    winding: float = float("nan")
    m1: int | None = None
    m2: int | None = None
    bulk_count: int | None = None
    discrete: tuple[complex, ...] = ()
    labels: tuple[str, ...] = ()
    checks: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n_zeros(self) -> int:
        """Return the number of zeros."""
        return len(self.zeros)

    @property
    def native(self) -> np.ndarray:
        """Return the zeros as z, with Lambda(z - eta/2) = 0."""
        return np.asarray(self.domain.to_native(np.asarray(self.zeros, dtype=complex)))

    @property
    def residual_max(self) -> float:
        """Return the worst |Lambda|/|Lambda'| over the zeros."""
        return max(self.residuals, default=0.0)


def _cauchy_derivative(func, points: np.ndarray, radius: float = CAUCHY_RADIUS) -> np.ndarray:
    """Four-point Cauchy stencil f'(z) ~ sum_k conj(w_k) f(z + r w_k) / (4 r)."""
    nodes = np.array([1, 1j, -1, -1j])
    stencil = (points[:, None] + radius * nodes[None, :]).ravel()
    values = func(stencil).reshape(points.size, 4)
    return values @ nodes.conj() / (4 * radius)


def _newton(func, seeds: np.ndarray, max_step: float) -> tuple[np.ndarray, np.ndarray, list[int], list[list[float]]]:
    """
    Damped Newton on all seeds at once.

    Returns:
        (points, step residuals, indices of stagnated seeds, |f| traces)
    """
    z = seeds.astype(complex).copy()
    f = func(z)
    traces = [[float(abs(v))] for v in f]
    done = np.zeros(z.size, dtype=bool)
    steps = np.full(z.size, np.inf)

    for iteration in range(NEWTON_MAX_ITER):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        deriv = _cauchy_derivative(func, z[active])
        step = f[active] / np.where(deriv == 0, _FLOOR, deriv)
        size = np.abs(step)
        step = np.where(size > max_step, step * max_step / np.maximum(size, _FLOOR), step)
        steps[active] = np.abs(step)
        scale = np.ones(active.size)
        trial = z[active] - step
        f_trial = func(trial)
        for _ in range(_MAX_HALVINGS):
            worse = ~np.isfinite(f_trial) | (np.abs(f_trial) > np.abs(f[active]))
            worse &= steps[active] > NEWTON_POLISH
            if not worse.any():
                break
            scale[worse] *= 0.5
            trial[worse] = z[active][worse] - scale[worse] * step[worse]
            f_trial[worse] = func(trial[worse])
        stagnant = np.abs(f_trial) >= np.abs(f[active])
        z[active], f[active] = trial, f_trial
        for idx, value in zip(active, f_trial):
            traces[idx].append(float(abs(value)))
        done[active] = (steps[active] < NEWTON_POLISH) | ((steps[active] < NEWTON_TOL) & stagnant)
        _LOGGER.debug("Newton iteration %d: %d seeds active", iteration, int((~done).sum()))

    final = np.abs(func(z)) / np.maximum(np.abs(_cauchy_derivative(func, z)), _FLOOR)
    stalled = [int(i) for i in np.flatnonzero(~(final < NEWTON_TOL))]
    return z, final, stalled, traces


def _grid_seeds(func, domain_native: tuple[tuple[float, float], tuple[float, float]], per_side: int, shift: float) -> np.ndarray:
    """Return local minima of the envelope-normalized log|f| on a padded grid."""
    (re_lo, re_hi), (im_lo, im_hi) = domain_native
    p_re, p_im = re_hi - re_lo, im_hi - im_lo
    xs = np.linspace(re_lo - ZERO_GRID_PAD * p_re, re_hi + ZERO_GRID_PAD * p_re, per_side)
    ys = np.linspace(im_lo - ZERO_GRID_PAD * p_im, im_hi + ZERO_GRID_PAD * p_im, per_side)
    grid = xs[None, :] + 1j * ys[:, None]
    values = func(grid.ravel()).reshape(grid.shape)
    envelope = shift * (ys[:, None] ** 2) * np.ones_like(xs)[None, :]
    field_ = np.log(np.maximum(np.abs(values), _FLOOR)) - envelope
    minima = ndimage.minimum_filter(field_, size=3, mode="nearest") == field_
    minima[0, :] = minima[-1, :] = minima[:, 0] = minima[:, -1] = False
    return grid[minima]


def _largest_gap_cut(values: np.ndarray, period: float, start: float) -> float:
    """Return a cut point in the middle of the largest cyclic gap of values."""
    if values.size == 0:
        return start
    reduced = np.sort((values - start) % period)
    gaps = np.diff(np.concatenate([reduced, [reduced[0] + period]]))
    k = int(np.argmax(gaps))
    return start + reduced[k] + gaps[k] / 2


def winding_number(func, corner: complex, periods: tuple[float, float], samples: int) -> float:
    """
    Return (1/2 pi) times the phase change of func around a period rectangle.

    Sampling doubles until consecutive phase steps stay below WINDING_MAX_STEP.
    """
    p_re, p_im = periods
    for _ in range(_WINDING_REFINEMENTS):
        t = np.linspace(0.0, 1.0, samples, endpoint=False)
        path = np.concatenate(
            [
                corner + p_re * t,
                corner + p_re + 1j * p_im * t,
                corner + p_re + 1j * p_im - p_re * t,
                corner + 1j * p_im - 1j * p_im * t,
            ]
        )
        values = func(path)
        ratios = np.roll(values, -1) / values
        dphase = np.angle(ratios)
        if np.max(np.abs(dphase)) < WINDING_MAX_STEP:
            return float(dphase.sum() / (2 * math.pi))
        samples *= 2
    return float(dphase.sum() / (2 * math.pi))


def _dedupe(points: np.ndarray, residuals: np.ndarray, domain: FundamentalDomain) -> tuple[list[complex], list[float]]:
    kept: list[complex] = []
    kept_res: list[float] = []
    for idx in np.argsort(residuals):
        w = domain.canonicalize(complex(points[idx]))
        duplicate = next((j for j, other in enumerate(kept) if domain.torus_distance(w, other) < DEDUPE_TOL), None)
        if duplicate is None:
            kept.append(w)
            kept_res.append(float(residuals[idx]))
    order = sorted(range(len(kept)), key=lambda j: (kept[j].imag, kept[j].real))
    return [kept[j] for j in order], [kept_res[j] for j in order]


def find_zeros(evaluator: LambdaEvaluator, domain: FundamentalDomain | None = None) -> ZeroSet:
    """
    Locate the N zeros of Lambda(u) in the fundamental domain.

    Args:
        evaluator: Joint eigenstate with its chain
        domain: Fundamental domain; derived from the parameters if omitted

    Returns:
        Fully analyzed ZeroSet (integers, labels, balance checks)

    Raises:
        DegeneracyContaminationError: If the state is not a t(u) eigenvector
        ZeroCountError: If the count cannot be certified after grid refinement
        NewtonError: If a seed stagnates and the count comes out short
    """
    model = evaluator.model
    params = model.params
    domain = domain or FundamentalDomain.for_params(params)
    quality = evaluator.quality()
    if quality > _QUALITY_TOL:
        raise DegeneracyContaminationError(f"Evaluator residual {quality:.3e} too large for a zero search", residual=quality)

    n = model.n_sites
    half_eta = params.eta / 2

    def func(z: np.ndarray) -> np.ndarray:
        return evaluator.values(np.asarray(z) - half_eta)

    tau_im = params.tau_im
    native_box = ((-0.5, 0.5), (-tau_im / 2, tau_im / 2))
    shift = math.pi * n / tau_im
    per_side = int(math.ceil(ZERO_GRID_FACTOR * math.sqrt(n)))

    found: list[complex] = []
    residuals: list[float] = []
    stalled_seed = None
    stalled_trace: list[float] = []
    for _ in range(ZERO_GRID_REFINEMENTS + 1):
        seeds = _grid_seeds(func, native_box, per_side, shift)
        points, final, stalled, traces = _newton(func, seeds, max_step=0.1 * min(1.0, tau_im))
        good = np.setdiff1d(np.arange(points.size), stalled)
        candidates = np.concatenate([np.asarray(domain.to_native(np.asarray(found, dtype=complex))), points[good]])
        cand_res = np.concatenate([np.asarray(residuals), final[good]])
        found_w, residuals = _dedupe(np.asarray(domain.from_native(candidates)), cand_res, domain)
        found = found_w
        if stalled:
            stalled_seed, stalled_trace = complex(seeds[stalled[0]]), traces[stalled[0]]
        _LOGGER.debug("Grid %dx%d gave %d seeds, %d distinct zeros", per_side, per_side, seeds.size, len(found))
        if len(found) >= n:
            break
        per_side *= 2

    native = np.asarray(domain.to_native(np.asarray(found, dtype=complex)))
    corner = complex(
        _largest_gap_cut(native.real, 1.0, -0.5),
        _largest_gap_cut(native.imag, tau_im, -tau_im / 2),
    )
    winding = winding_number(func, corner, (1.0, tau_im), samples=max(64, 16 * n))
    if abs(winding - n) > WINDING_TOL or len(found) != n:
        if len(found) < n and stalled_seed is not None:
            raise NewtonError(
                f"Newton stagnated from seed {stalled_seed}; only {len(found)} of {n} zeros found",
                seed=stalled_seed,
                trace=stalled_trace,
            )
        raise ZeroCountError(
            f"Found {len(found)} zeros, winding number {winding:.4f}, expected {n}",
            winding=winding,
            found=len(found),
        )
    _LOGGER.info("Certified %d zeros (winding %.6f)", n, winding)

    zset = ZeroSet(zeros=tuple(found), residuals=tuple(residuals), domain=domain, winding=winding)
    return analyze(zset, model)


def analyze(zset: ZeroSet, model: SpinChainModel) -> ZeroSet:
    """Attach integers, labels and consistency checks to a raw zero set."""
    m1, m2 = recover_integers(zset, model)
    report = classify(zset, model)
    checks = {
        "partner_defect": partner_defect(zset),
        "expectations": regime_expectations(model, m1, m2, report.bulk_count),
        "balance": report.balance,
        "census": report.census,
        "max_deviation": report.max_deviation,
        "edge_distances": list(report.edge_distances),
    }
    return replace(
        zset,
        m1=m1,
        m2=m2,
        bulk_count=report.bulk_count,
        discrete=report.discrete,
        labels=report.tags,
        checks=checks,
    )


def partner_defect(zset: ZeroSet) -> float:
    """Return the worst distance from a zero's conjugate to the nearest zero."""
    worst = 0.0
    for w in zset.zeros:
        image = zset.domain.canonicalize(w.conjugate())
        worst = max(worst, min(zset.domain.torus_distance(image, other) for other in zset.zeros))
    if worst > PARTNER_TOL:
        _LOGGER.warning("Conjugation closure defect %.3e exceeds %.1e", worst, PARTNER_TOL)
    return worst


def _sum_rule_defect(zset: ZeroSet, model: SpinChainModel) -> complex:
    twist = model.twist
    tau = model.params.tau
    return (
        complex(np.sum(zset.native))
        - complex(sum(model.inhomogeneities))
        - tau / 2 * (twist.delta_x + twist.delta_y)
        - 0.5 * (twist.delta_y + twist.delta_z)
    )


def recover_integers(zset: ZeroSet, model: SpinChainModel) -> tuple[int, int]:
    """
    Return the integers (M1, M2) of the zero sum rule.

    The sum of the canonical zeros equals the inhomogeneity sum plus
    tau/2 (dx + dy + 2 M1) + 1/2 (dy + dz + 2 M2).

    Raises:
        IntegerRecoveryError: If no integer pair fits within SUM_RULE_TOL
    """
    defect = _sum_rule_defect(zset, model)
    tau_im = model.params.tau_im
    m1 = round(defect.imag / tau_im)
    m2 = round(defect.real)
    rest = abs(defect - 1j * tau_im * m1 - m2)
    if rest > SUM_RULE_TOL:
        raise IntegerRecoveryError(f"Sum-rule defect {rest:.3e} is not a lattice point", defect=rest)
    return int(m1), int(m2)


def regime_expectations(model: SpinChainModel, m1: int, m2: int, bulk_count: int) -> dict[str, Any]:
    """Compare (M1, M2) with the values the bulk count predicts in each regime."""
    twist = model.twist
    regime = model.params.regime
    if regime is Regime.REAL_LARGE:
        name, value, expected = "M2", m2, -(twist.delta_y + twist.delta_z + bulk_count) / 2
    elif regime is Regime.REAL_SMALL:
        name, value, expected = "M2", m2, 0
    elif regime is Regime.IMAG_LARGE:
        name, value, expected = "M1", m1, (bulk_count - twist.delta_x - twist.delta_y) / 2
    else:
        name, value, expected = "M1", m1, 0
    holds = value == expected
    if not holds:
        _LOGGER.warning("%s=%d differs from the %s expectation %s", name, value, regime.value, expected)
    return {"integer": name, "value": value, "expected": expected, "holds": holds}


def _template_offsets(eta_d: float, period: float, n_max: int) -> list[tuple[int, int, float]]:
    out = []
    for n in range(1, n_max + 1):
        for nu in (1, -1):
            out.append((n, nu, (n + 1) * eta_d / 2 + (1 - nu) * period / 4))
    return out


def _cyclic(x: float, period: float) -> float:
    return x - period * round(x / period)


def _template_deviation(y: float, offset: float, period: float) -> float:
    """Return the distance of Im w from the pair of lines +-offset modulo the period."""
    return min(abs(_cyclic(y - offset, period)), abs(_cyclic(y + offset, period)))


def classify(zset: ZeroSet, model: SpinChainModel) -> PatternReport:
    """
    Tag every zero and split the set into bulk and discrete zeros.

    Tags are half_line, real_axis, boundary_discrete, conjugate_pair(n,nu) or
    anomalous; anomalous zeros stay in the discrete set.
    """
    params = model.params
    domain = zset.domain
    regime = params.regime
    p_re, p_im = domain.periods
    eta_d = params.eta_scale
    templates = _template_offsets(eta_d, p_im, STRING_MAX_LENGTH)

    tags: list[str] = []
    strings: list[StringParams] = []
    deviations: list[float] = []
    edge_distances: list[float] = []
    for w in zset.zeros:
        y = w.imag
        to_half = abs(abs(y) - p_im / 2)
        if to_half < PATTERN_TOL:
            tags.append(HALF_LINE)
            deviations.append(to_half)
            continue
        if abs(y) < PATTERN_TOL:
            edge = p_re / 2 - abs(w.real)
            edge_distances.append(edge)
            tags.append(BOUNDARY_DISCRETE if abs(w.real) > p_re / 4 else REAL_AXIS)
            deviations.append(abs(y))
            continue
        scored = [(_template_deviation(y, offset, p_im), n, nu) for n, nu, offset in templates]
        best = min(score for score, _, _ in scored)
        # coinciding lines go to the shortest string, then to nu = +1
        deviation, n, nu = min((item for item in scored if item[0] <= best + _TIE_ATOL), key=lambda item: (item[1], -item[2]))
        if deviation < PATTERN_TOL:
            tags.append(f"conjugate_pair({n},{nu})")
            strings.append(StringParams(x=w.real, n=n, nu=nu))
            deviations.append(deviation)
        else:
            tags.append(ANOMALOUS)
            deviations.append(deviation)
            _LOGGER.warning("Zero %s matches no string template (deviation %.3f)", w, deviation)

    if regime.is_large:
        bulk_mask = [tag == HALF_LINE for tag in tags]
    else:
        bulk_mask = [tag == "conjugate_pair(1,1)" for tag in tags]
    discrete = tuple(w for w, bulk in zip(zset.zeros, bulk_mask) if not bulk)
    in_band = tuple(w for w in discrete if abs(w.imag) <= eta_d / 2 + SNAP_TOL)
    balance = balance_checks(discrete, params, model.twist)

    return PatternReport(
        tags=tuple(tags),
        strings=tuple(strings),
        max_deviation=max(deviations, default=0.0),
        bulk_count=sum(bulk_mask),
        discrete=discrete,
        in_band=in_band,
        edge_distances=tuple(edge_distances),
        balance=balance,
    )


def _region_sum(discrete: Sequence[complex], sign: int, shift: complex) -> int:
    """Return sum_t s(sign * w_t + shift)."""
    return sum(sign_region(sign * w + shift) for w in discrete)


def balance_checks(discrete: Sequence[complex], params: EllipticParams, twist: BoundaryTwist) -> dict[str, Any]:
    """
    Evaluate the integer balance relations of the discrete zeros.

    In domain coordinates the half-shift h is i eta/2 for real eta and eta/2
    for imaginary eta, both pointing along +Im. The three sides reported
    must coincide.
    """
    h = 1j * params.eta_scale / 2
    regime = params.regime
    if regime.is_large:
        sides = (
            _region_sum(discrete, 1, h),
            _region_sum(discrete, -1, h),
            -_region_sum(discrete, 1, -h),
        )
    elif regime is Regime.REAL_SMALL:
        offset = twist.delta_y + twist.delta_z
        sides = (
            _region_sum(discrete, 1, -h) + offset,
            _region_sum(discrete, -1, -h) - offset,
            -_region_sum(discrete, 1, h) - offset,
        )
    else:
        offset = twist.delta_x + twist.delta_y
        sides = (
            _region_sum(discrete, 1, h) - offset,
            _region_sum(discrete, -1, h) + offset,
            -_region_sum(discrete, 1, -h) + offset,
        )
    holds = len(set(sides)) == 1
    if not holds:
        _LOGGER.debug("Balance relation sides differ in %s: %s", regime.value, sides)
    return {"sides": sides, "holds": holds}


def energy_from_zeros(zset: ZeroSet, model: SpinChainModel) -> float:
    """
    Return the energy from the zeros and M1.

    Raises:
        ImaginaryResidueError: If the assembled energy keeps an imaginary part
    """
    params = model.params
    twist = model.twist
    m1 = zset.m1 if zset.m1 is not None else recover_integers(zset, model)[0]
    z = zset.native
    bracket = (
        complex(np.sum(params.zeta(z - params.eta / 2)))
        + model.n_sites / 2 * complex(params.zeta(params.eta))
        + 1j * math.pi * (twist.delta_x + twist.delta_y + 2 * m1)
    )
    energy = -complex(params.energy_scale) * bracket
    scale = max(1.0, abs(energy))
    if abs(energy.imag) > ENERGY_IMAG_TOL * scale:
        raise ImaginaryResidueError(
            f"Energy from zeros keeps imaginary part {energy.imag:.3e}", residue=abs(energy.imag)
        )
    return energy.real


def lambda0(evaluator: LambdaEvaluator, zset: ZeroSet, probe: complex = PROBE_POINT) -> complex:
    """Return the constant prefactor of the product form of Lambda from one probe point."""
    value = complex(evaluator.values([probe])[0])
    return value / complex(_product_form(probe, zset, evaluator.model))


def _product_form(u: complex | np.ndarray, zset: ZeroSet, model: SpinChainModel) -> complex | np.ndarray:
    params = model.params
    twist = model.twist
    m1 = zset.m1 if zset.m1 is not None else recover_integers(zset, model)[0]
    u = np.asarray(u, dtype=complex)
    exponent = -1j * math.pi * (u + params.eta / 2) * (twist.delta_x + twist.delta_y + 2 * m1)
    factors = params.sigma(u[..., None] - zset.native + params.eta / 2)
    return np.exp(exponent) * np.prod(factors, axis=-1)


def reconstruct_lambda(u: complex | np.ndarray, zset: ZeroSet, model: SpinChainModel, prefactor: complex) -> complex | np.ndarray:
    """Evaluate Lambda(u) from its zeros, M1 and the prefactor."""
    return prefactor * _product_form(u, zset, model)


def _twist_charge(evaluator: LambdaEvaluator) -> int:
    u_op = twist_operator(evaluator.model.twist, evaluator.model.n_sites)
    return int(round(np.vdot(evaluator.state, u_op @ evaluator.state).real))


def _relative(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(rhs), abs(lhs), _FLOOR)


def verify_functional_relations(
    evaluator: LambdaEvaluator,
    model: SpinChainModel | None = None,
    probes: Sequence[complex] = (PROBE_POINT, 0.21 - 0.13j, -0.33 + 0.08j),
) -> dict[str, Any]:
    """
    Return the worst relative residuals of the functional relations of Lambda.

    Keys: product_at_theta (p2), quasi_period_one (p3), quasi_period_tau (p4),
    conjugation and, unless the inhomogeneities coincide, fusion_at_theta (p1).
    """
    model = model or evaluator.model
    params = model.params
    twist = model.twist
    n = model.n_sites
    thetas = np.asarray(model.inhomogeneities)
    eta, tau = params.eta, params.tau
    report: dict[str, Any] = {}

    lam_theta = evaluator.values(thetas)
    distinct = len({complex(round(t.real, 12), round(t.imag, 12)) for t in thetas}) == n
    if distinct:
        lam_shift = evaluator.values(thetas - eta)
        sign = np.exp(-1j * math.pi * (twist.delta_x + twist.delta_z))
        report["fusion_at_theta"] = max(
            _relative(lam_theta[j] * lam_shift[j], sign * a_of(t, model) * d_of(t - eta, model))
            for j, t in enumerate(thetas)
        )
        report["fusion_skipped"] = False
    else:
        report["fusion_skipped"] = True

    charge = _twist_charge(evaluator)
    report["charge"] = charge
    report["product_at_theta"] = _relative(
        complex(np.prod(lam_theta)), charge * complex(np.prod([a_of(t, model) for t in thetas]))
    )

    probes = np.asarray(probes, dtype=complex)
    base = evaluator.values(probes)
    shifted_one = evaluator.values(probes + 1)
    shifted_tau = evaluator.values(probes + tau)
    factor_one = (-1) ** n * np.exp(-1j * math.pi * (twist.delta_x + twist.delta_y))
    factor_tau = (-1) ** n * np.exp(
        -2j
        * math.pi
        * (n * probes + n * (eta + tau) / 2 - thetas.sum() + (twist.delta_y + twist.delta_z) / 2)
    )
    report["quasi_period_one"] = max(_relative(a, factor_one * b) for a, b in zip(shifted_one, base))
    report["quasi_period_tau"] = max(_relative(a, f * b) for a, f, b in zip(shifted_tau, factor_tau, base))

    if params.is_real_eta:
        mirror = -probes.conj() - eta
    else:
        mirror = probes.conj() - eta
    sign = (-1) ** (n + twist.twisted)
    mirrored = evaluator.values(mirror)
    report["conjugation"] = max(_relative(a, sign * np.conj(b)) for a, b in zip(base, mirrored))
    return report
