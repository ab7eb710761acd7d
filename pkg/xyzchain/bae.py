"""Homogeneous T-Q relation and Bethe ansatz equations at degenerate crossing parameters."""
from __future__ import annotations

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .const import (
    BAE_ACCEPT_TOL,
    BAE_COALESCE_TOL,
    BAE_MATCH_RTOL,
    BAE_MAX_HALVINGS,
    BAE_MAX_ITER,
    BAE_MAX_SEEDS,
    BAE_MAX_SITES,
    BAE_POLE_PROBE,
    BAE_POLE_SCALE,
    BAE_PROBES,
    BAE_ROOT_ZERO_TOL,
    BAE_SINGULAR_COND,
    BAE_STRING_SHRINK,
    BAE_TOL,
    PROBE_POINT,
    SELECTION_TOL,
)
from .elliptic import EllipticParams, Regime
from .exceptions import (
    CoalescenceError,
    NewtonError,
    ParameterError,
    PoleCancellationError,
    SingularJacobianError,
    XYZChainError,
)
from .model import BoundaryTwist, SpinChainModel
from .spectrum import LambdaEvaluator, SpectrumRecord

_LOGGER = logging.getLogger(__name__)

_EXCLUDED_ATOL = 1e-12
_TYPICAL_PROBES = (PROBE_POINT, 0.29 - 0.11j, -0.17 + 0.23j)


@dataclass(frozen=True)
class DegeneratePoint:
    """Crossing parameter at which Lambda has a homogeneous T-Q form."""

    L: int
    K: int
    n_sites: int
    n1: int
    twist: BoundaryTwist
    tau: complex
    eta_value: complex

    @property
    def params(self) -> EllipticParams:
        """Return the elliptic parameters at this point."""
        return EllipticParams(self.tau, self.eta_value)

    @property
    def regime(self) -> Regime:
        """Return the regime interval the point lands in."""
        return self.params.regime

    @property
    def twist_winding(self) -> int:
        """Return 2L + dx + dy, the winding of the exponential prefactor."""
        return 2 * self.L + self.twist.delta_x + self.twist.delta_y

    @property
    def selection_count(self) -> int:
        """Return how many values the selection index k takes."""
        return self.n_sites * (1 + self.twist.twisted)

    def selection_phase(self, k: int) -> complex:
        """Return exp(i k pi (1 + d0) / N)."""
        return cmath.exp(1j * k * math.pi * (1 + self.twist.delta_0) / self.n_sites)


class StringSeed(NamedTuple):
    """Length n, parity nu and real center x of one seeded string."""

    n: int
    nu: int
    x: float


@dataclass(frozen=True)
class BetheState:
    """Bethe roots u_l, the phase phi and the selection index k."""

    roots: tuple[complex, ...]
    phi: complex
    selection_index: int
    residual: float
    selection_residual: float
    seed: tuple[StringSeed, ...] = ()
    trace: tuple[float, ...] = field(default=(), compare=False)

    def lambdas(self, params: EllipticParams) -> tuple[complex, ...]:
        """Return the roots in string coordinates, u = i lambda - eta/2 or u = lambda - eta/2."""
        shift = params.eta / 2
        if params.is_real_eta:
            return tuple(-1j * (u + shift) for u in self.roots)
        return tuple(u + shift for u in self.roots)


class SolveOutcome(NamedTuple):
    """Result of one seeded solve in the multi-seed driver."""

    seed: tuple[StringSeed, ...]
    k: int
    state: BetheState | None
    error: str | None


class StateMatch(NamedTuple):
    """A diagonalization state paired with the Bethe state reproducing its Lambda."""

    record_index: int
    energy: float
    state: BetheState | None
    deviation: float


def degenerate_eta(
    L: int,
    K: int,
    n_sites: int,
    n1: int,
    twist: BoundaryTwist,
    tau: complex,
) -> DegeneratePoint:
    """
    Return the degenerate point ((2L+dx+dy) tau + (2K+dy+dz)) / (N - 2 N1).

    Raises:
        ParameterError: If N = 2 N1, eta hits 0, 1 or tau, or eta is outside
            both admissible intervals
    """
    if n_sites < 1 or not 0 <= n1 <= n_sites:
        raise ParameterError(f"Need N >= 1 and 0 <= N1 <= N, got N={n_sites}, N1={n1}")
    denominator = n_sites - 2 * n1
    if denominator == 0:
        raise ParameterError(f"N - 2 N1 vanishes for N={n_sites}, N1={n1}")
    tau = complex(tau)
    tau_part = (2 * L + twist.delta_x + twist.delta_y) / denominator
    one_part = (2 * K + twist.delta_y + twist.delta_z) / denominator
    eta = complex(one_part, tau_part * tau.imag)
    for excluded in (0.0, 1.0, tau):
        if abs(eta - excluded) < _EXCLUDED_ATOL:
            raise ParameterError(f"Degenerate eta={eta} hits the excluded point {excluded}")
    try:
        params = EllipticParams(tau, eta)
    except ParameterError as err:
        raise ParameterError(f"Degenerate eta={eta} (L={L}, K={K}) is not admissible: {err}") from err
    point = DegeneratePoint(L, K, n_sites, n1, twist, tau, params.eta)
    _LOGGER.debug("Degenerate point L=%d K=%d N=%d N1=%d twist=%s: eta=%s in %s", L, K, n_sites, n1, twist.value, eta, params.regime.value)
    return point


def degenerate_points(
    n_sites: int,
    n1: int,
    twist: BoundaryTwist,
    tau: complex,
    l_range: Sequence[int] = range(-4, 5),
    k_range: Sequence[int] = range(-4, 5),
) -> list[DegeneratePoint]:
    """Return every admissible degenerate point in the (L, K) window, sorted by regime then eta."""
    points = []
    for L, K in itertools.product(l_range, k_range):
        try:
            points.append(degenerate_eta(L, K, n_sites, n1, twist, tau))
        except ParameterError:
            continue
    points.sort(key=lambda p: (p.regime.value, p.params.eta_scale))
    return points


def _log_sigma_ratio(params: EllipticParams, top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(params.sigma(top) / params.sigma(bottom))


def _zeta(params: EllipticParams, u: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return params.sigma_prime(u) / params.sigma(u)


def _wrap(values: np.ndarray) -> np.ndarray:
    """Move imaginary parts into (-pi, pi]."""
    imag = np.angle(np.exp(1j * values.imag))
    return values.real + 1j * imag


def _residuals(x: np.ndarray, point: DegeneratePoint, params: EllipticParams, k: int) -> np.ndarray:
    """
    Return the log-form BAE residuals followed by the selection-rule residual.

    Root j contributes A (2 u_j + eta) + 2 i phi + N log(sigma(u_j+eta)/sigma(u_j))
    + i pi (dx + dz) - sum_{l != j} log(sigma(u_j-u_l+eta)/sigma(u_j-u_l-eta)).
    """
    roots, phi = x[:-1], x[-1]
    eta, n = params.eta, point.n_sites
    twist = point.twist
    winding = 1j * math.pi * point.twist_winding
    diff = roots[:, None] - roots[None, :]
    off = ~np.eye(roots.size, dtype=bool)

    pair = np.zeros_like(diff)
    if roots.size > 1:
        pair[off] = _log_sigma_ratio(params, diff[off] + eta, diff[off] - eta)
    own = _log_sigma_ratio(params, roots + eta, roots)
    bae = (
        winding * (2 * roots + eta)
        + 2j * phi
        + n * own
        + 1j * math.pi * (twist.delta_x + twist.delta_z)
        - pair.sum(axis=1)
    )
    selection = 1j * phi + own.sum() - 1j * math.pi * k * (1 + twist.delta_0) / n
    return _wrap(np.append(bae, selection))


def _jacobian(x: np.ndarray, point: DegeneratePoint, params: EllipticParams) -> np.ndarray:
    roots = x[:-1]
    size = roots.size
    eta, n = params.eta, point.n_sites
    winding = 1j * math.pi * point.twist_winding
    jac = np.zeros((size + 1, size + 1), dtype=complex)

    own = _zeta(params, roots + eta) - _zeta(params, roots)
    cross = np.zeros((size, size), dtype=complex)
    if size > 1:
        diff = roots[:, None] - roots[None, :]
        off = ~np.eye(size, dtype=bool)
        cross[off] = _zeta(params, diff[off] + eta) - _zeta(params, diff[off] - eta)
    jac[:size, :size] = cross
    jac[np.arange(size), np.arange(size)] = 2 * winding + n * own - cross.sum(axis=1)
    jac[:size, size] = 2j
    jac[size, :size] = own
    jac[size, size] = 1j
    return jac


def _closest_pair(roots: np.ndarray) -> float:
    if roots.size < 2:
        return math.inf
    diff = np.abs(roots[:, None] - roots[None, :])
    return float(diff[~np.eye(roots.size, dtype=bool)].min())


def string_roots(seed: Sequence[StringSeed], params: EllipticParams, shrink: float = BAE_STRING_SHRINK) -> np.ndarray:
    """
    Place the roots u_l of a string configuration.

    For real eta, lambda = x + ((n+1)/2 - k) eta i + (1-nu) i/4 and u = i lambda - eta/2;
    for imaginary eta, lambda = x + ((n+1)/2 - k) eta + (1-nu) tau/4 and u = lambda - eta/2.
    The spacing is scaled by 1 - shrink.
    """
    eta = params.eta
    spacing = (1 - shrink) * (eta * 1j if params.is_real_eta else eta)
    parity_shift = 0.25j if params.is_real_eta else params.tau / 4
    roots = []
    for string in seed:
        if string.n < 1 or string.nu not in (1, -1):
            raise ParameterError(f"Invalid string descriptor {string}")
        for k in range(1, string.n + 1):
            lam = string.x + ((string.n + 1) / 2 - k) * spacing + (1 - string.nu) * parity_shift
            roots.append(1j * lam - eta / 2 if params.is_real_eta else lam - eta / 2)
    return np.asarray(roots, dtype=complex)


def solve_bae(
    point: DegeneratePoint,
    params: EllipticParams,
    seed: Sequence[StringSeed],
    k: int = 1,
    phi0: complex = 0.0,
) -> BetheState:
    """
    Solve the Bethe ansatz equations and selection rule by damped Newton.

    The unknowns are the roots u_l and phi. Each residual is unwrapped against
    its linear prediction, so a step never changes its 2 pi i branch. A step is
    halved up to BAE_MAX_HALVINGS times until the residual norm decreases.

    Args:
        point: Degenerate crossing parameter
        params: Elliptic parameters at point.eta_value
        seed: String descriptors (n, nu, x); the lengths must add up to N1
        k: Selection index, 1 <= k <= point.selection_count
        phi0: Starting phase

    Returns:
        Converged state with its residual trace

    Raises:
        ParameterError: On mismatched inputs or N above BAE_MAX_SITES
        CoalescenceError: If two roots meet, or a root meets a zero of Lambda
        SingularJacobianError: If the Newton matrix is singular
        NewtonError: If the residual stalls above BAE_ACCEPT_TOL
    """
    if point.n_sites > BAE_MAX_SITES:
        raise ParameterError(f"BAE solver supports N <= {BAE_MAX_SITES}, got {point.n_sites}")
    if abs(params.eta - point.eta_value) > _EXCLUDED_ATOL or params.tau != point.tau:
        raise ParameterError(f"params eta={params.eta} do not match the degenerate point eta={point.eta_value}")
    if not 1 <= k <= point.selection_count:
        raise ParameterError(f"Selection index {k} outside 1..{point.selection_count}")
    seed = tuple(StringSeed(*s) for s in seed)
    if sum(s.n for s in seed) != point.n1:
        raise ParameterError(f"Seed holds {sum(s.n for s in seed)} roots, N1={point.n1}")

    roots = string_roots(seed, params)
    if _closest_pair(roots) < BAE_COALESCE_TOL:
        raise CoalescenceError(f"Seed {seed} places two roots on top of each other")

    x = np.append(roots, complex(phi0))
    values = _residuals(x, point, params, k)
    if not np.all(np.isfinite(values)):
        raise NewtonError(f"Seed {seed} starts on a pole of the BAE", seed=seed)
    norm = float(np.linalg.norm(values))
    trace = [norm]

    for iteration in range(BAE_MAX_ITER):
        if np.max(np.abs(values)) < BAE_TOL:
            break
        jac = _jacobian(x, point, params)
        try:
            if np.linalg.cond(jac) > BAE_SINGULAR_COND:
                raise SingularJacobianError(f"BAE Jacobian is singular at iteration {iteration} from seed {seed}")
            step = np.linalg.solve(jac, -values)
        except np.linalg.LinAlgError as err:
            raise SingularJacobianError(f"BAE Jacobian is singular at iteration {iteration}: {err}") from err

        accepted = False
        for halving in range(BAE_MAX_HALVINGS + 1):
            scale = 0.5**halving
            trial = x + scale * step
            predicted = (1 - scale) * values
            raw = _residuals(trial, point, params, k)
            unwrapped = raw + 2j * math.pi * np.round((predicted - raw).imag / (2 * math.pi))
            trial_norm = float(np.linalg.norm(unwrapped))
            if np.all(np.isfinite(unwrapped)) and trial_norm < norm:
                accepted = True
                break
        if not accepted:
            _LOGGER.debug("BAE Newton stalled at iteration %d with residual %.3e", iteration, norm)
            break
        if _closest_pair(trial[:-1]) < BAE_COALESCE_TOL:
            raise CoalescenceError(f"Roots coalesced at iteration {iteration} from seed {seed}")
        x, values, norm = trial, unwrapped, trial_norm
        trace.append(norm)
        _LOGGER.debug("BAE iteration %d: residual %.3e after %d halvings", iteration, norm, halving)

    worst = float(np.max(np.abs(values)))
    if worst > BAE_ACCEPT_TOL:
        raise NewtonError(
            f"BAE Newton from seed {seed} stalled at residual {worst:.3e}",
            seed=seed,
            trace=trace,
        )

    roots, phi = tuple(complex(u) for u in x[:-1]), complex(x[-1])
    selection = selection_residual(roots, phi, k, point, params)
    if selection > SELECTION_TOL:
        raise NewtonError(f"Selection rule misses exp(i k pi (1+d0)/N) by {selection:.3e}", seed=seed, trace=trace)
    state = BetheState(
        roots=roots,
        phi=phi,
        selection_index=k,
        residual=worst,
        selection_residual=selection,
        seed=seed,
        trace=tuple(trace),
    )
    check_pole_cancellation(state, point, params)
    _check_roots_off_zeros(state, point, params)
    _LOGGER.info(
        "Solved BAE N=%d twist=%s k=%d in %d steps: residual %.2e, phi=%s",
        point.n_sites,
        point.twist.value,
        k,
        len(trace) - 1,
        worst,
        phi,
    )
    return state


def selection_residual(roots: Sequence[complex], phi: complex, k: int, point: DegeneratePoint, params: EllipticParams) -> float:
    """Return |exp(i phi) prod sigma(u_l+eta)/sigma(u_l) - exp(i k pi (1+d0)/N)|."""
    u = np.asarray(roots, dtype=complex)
    product = complex(np.prod(params.sigma(u + params.eta) / params.sigma(u)))
    return abs(cmath.exp(1j * phi) * product - point.selection_phase(k))


def _tq_terms(u: complex, state: BetheState, point: DegeneratePoint, params: EllipticParams) -> tuple[complex, complex]:
    """Return the two terms of the T-Q relation at u."""
    eta, n = params.eta, point.n_sites
    twist = point.twist
    winding = 1j * math.pi * point.twist_winding
    roots = np.asarray(state.roots, dtype=complex)
    sigma_eta = params.sigma(eta)
    q_here = params.sigma(u - roots)
    first = (
        cmath.exp(winding * u + 1j * state.phi)
        * (params.sigma(u + eta) / sigma_eta) ** n
        * np.prod(params.sigma(u - eta - roots) / q_here)
    )
    second = (
        cmath.exp(-1j * math.pi * (twist.delta_x + twist.delta_z))
        * cmath.exp(-winding * (u + eta) - 1j * state.phi)
        * (params.sigma(u) / sigma_eta) ** n
        * np.prod(params.sigma(u + eta - roots) / q_here)
    )
    return complex(first), complex(second)


def _tq_direct(u: complex, state: BetheState, point: DegeneratePoint, params: EllipticParams) -> complex:
    first, second = _tq_terms(u, state, point, params)
    return first + second


def tq_lambda(u: complex, state: BetheState, point: DegeneratePoint, params: EllipticParams) -> complex:
    """
    Evaluate Lambda(u) from the homogeneous T-Q relation.

    Within BAE_POLE_PROBE of a Bethe root the value is the average over
    u_l +- BAE_POLE_PROBE, after checking that the pole cancels.

    Raises:
        PoleCancellationError: If Lambda is unbounded next to a root
    """
    u = complex(u)
    for root in state.roots:
        if abs(u - root) < BAE_POLE_PROBE:
            return _root_value(root, state, point, params)
    return _tq_direct(u, state, point, params)


def _typical_scale(state: BetheState, point: DegeneratePoint, params: EllipticParams) -> float:
    return max(abs(_tq_direct(p, state, point, params)) for p in _TYPICAL_PROBES)


def _root_value(root: complex, state: BetheState, point: DegeneratePoint, params: EllipticParams) -> complex:
    left = _tq_direct(root - BAE_POLE_PROBE, state, point, params)
    right = _tq_direct(root + BAE_POLE_PROBE, state, point, params)
    scale = _typical_scale(state, point, params)
    if max(abs(left), abs(right)) > BAE_POLE_SCALE * scale:
        raise PoleCancellationError(f"T-Q expression does not cancel its pole at root {root}")
    return 0.5 * (left + right)


def check_pole_cancellation(state: BetheState, point: DegeneratePoint, params: EllipticParams) -> float:
    """
    Return the worst |Lambda(u_l +- probe)| relative to the typical scale.

    Raises:
        PoleCancellationError: If any ratio exceeds BAE_POLE_SCALE
    """
    scale = _typical_scale(state, point, params)
    worst = 0.0
    for root in state.roots:
        for sign in (1, -1):
            value = abs(_tq_direct(root + sign * BAE_POLE_PROBE, state, point, params))
            worst = max(worst, value / scale)
    if worst > BAE_POLE_SCALE:
        raise PoleCancellationError(f"T-Q expression is unbounded near a root: ratio {worst:.3e}")
    return worst


def _check_roots_off_zeros(state: BetheState, point: DegeneratePoint, params: EllipticParams) -> None:
    scale = _typical_scale(state, point, params)
    for root in state.roots:
        if abs(_root_value(root, state, point, params)) < BAE_ROOT_ZERO_TOL * scale:
            raise CoalescenceError(f"Bethe root {root} coincides with a zero of Lambda")


def zero_root_residuals(zeros: Sequence[complex], state: BetheState, point: DegeneratePoint, params: EllipticParams) -> float:
    """
    Return the worst defect of the zero-root relation at zeros z_j of Lambda.

    At u = z_j - eta/2 the two T-Q terms cancel; the defect is
    |first + second| / |second|.
    """
    worst = 0.0
    for z in zeros:
        first, second = _tq_terms(complex(z) - params.eta / 2, state, point, params)
        worst = max(worst, abs(first + second) / max(abs(second), np.finfo(float).tiny))
    return worst


def string_deviation(state: BetheState, params: EllipticParams) -> float:
    """Return the worst distance of the roots from the best-fit string template of their seed."""
    if not state.seed:
        raise ParameterError("State carries no seed to compare against")
    template = string_roots(state.seed, params, shrink=0.0)
    found = np.asarray(state.roots, dtype=complex)
    # x moves along Im u for real eta and along Re u for imaginary eta
    axis = 1j if params.is_real_eta else 1.0
    worst, start = 0.0, 0
    for string in state.seed:
        stop = start + string.n
        diff = found[start:stop] - template[start:stop]
        rest = diff - np.mean(diff / axis).real * axis
        d_re = rest.real - np.round(rest.real)
        d_im = rest.imag - params.tau_im * np.round(rest.imag / params.tau_im)
        worst = max(worst, float(np.max(np.hypot(d_re, d_im))))
        start = stop
    return worst


def _partitions(total: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = total if largest is None else largest
    if total == 0:
        yield ()
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def string_seeds(n_roots: int, params: EllipticParams, limit: int = BAE_MAX_SEEDS) -> list[tuple[StringSeed, ...]]:
    """Return up to limit deterministic string configurations holding n_roots roots."""
    period = params.tau_im if params.is_real_eta else 1.0
    seeds: list[tuple[StringSeed, ...]] = []
    for lengths in _partitions(n_roots):
        count = len(lengths)
        centers = [period * ((j + 0.5) / count - 0.5) * 0.8 + 0.0371 * period for j in range(count)]
        for parities in itertools.product((1, -1), repeat=count):
            seeds.append(tuple(StringSeed(n, nu, x) for n, nu, x in zip(lengths, parities, centers)))
            if len(seeds) >= limit:
                return seeds
    return seeds


def _solve_task(task: tuple[DegeneratePoint, EllipticParams, tuple[StringSeed, ...], int]) -> SolveOutcome:
    point, params, seed, k = task
    try:
        return SolveOutcome(seed, k, solve_bae(point, params, seed, k), None)
    except XYZChainError as err:
        return SolveOutcome(seed, k, None, str(err))


def solve_many(
    point: DegeneratePoint,
    params: EllipticParams,
    seeds: Sequence[Sequence[StringSeed]],
    k_values: Sequence[int],
    workers: int = 1,
) -> list[SolveOutcome]:
    """Solve every (seed, k) pair, in a process pool when workers > 1; failures are reported, not raised."""
    tasks = [(point, params, tuple(StringSeed(*s) for s in seed), k) for seed in seeds for k in k_values]
    if workers > 1 and len(tasks) > 1:
        with Pool(workers) as pool:
            outcomes = pool.map(_solve_task, tasks)
    else:
        outcomes = [_solve_task(task) for task in tasks]
    solved = sum(1 for outcome in outcomes if outcome.state is not None)
    _LOGGER.info("Solved %d of %d seeded BAE systems", solved, len(outcomes))
    return outcomes


def probe_points(params: EllipticParams, count: int = BAE_PROBES, seed: int = 7) -> np.ndarray:
    """Return deterministic spectral parameters spread over a period cell."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-0.4, 0.4, count) + 1j * params.tau_im * rng.uniform(-0.4, 0.4, count)


def lambda_deviation(state: BetheState, point: DegeneratePoint, params: EllipticParams, evaluator: LambdaEvaluator) -> float:
    """Return max |tq_lambda - Lambda_ED| over the probe points, relative to max |Lambda_ED|."""
    probes = probe_points(params)
    exact = evaluator.values(probes)
    tq = np.asarray([tq_lambda(u, state, point, params) for u in probes])
    return float(np.max(np.abs(tq - exact)) / max(float(np.max(np.abs(exact))), np.finfo(float).tiny))


def selection_index_for(evaluator: LambdaEvaluator, point: DegeneratePoint) -> int:
    """Return the k whose selection phase equals Lambda(0) of the state."""
    value = complex(evaluator.values([0.0])[0])
    unit = math.pi * (1 + point.twist.delta_0) / point.n_sites
    k = round(cmath.phase(value) / unit) % point.selection_count
    return k or point.selection_count


def match_spectrum(
    point: DegeneratePoint,
    params: EllipticParams,
    records: Sequence[SpectrumRecord],
    seeds: Sequence[Sequence[StringSeed]] | None = None,
    workers: int = 1,
) -> list[StateMatch]:
    """
    Pair diagonalization states with solved Bethe states.

    For each state the selection index is read off Lambda(0), the seeds are
    solved at that index, and the first solution whose tq_lambda reproduces
    Lambda within BAE_MATCH_RTOL is kept. Unmatched states carry state=None.
    """
    model = SpinChainModel(point.n_sites, params, point.twist)
    seeds = seeds if seeds is not None else string_seeds(point.n1, params)
    matches = []
    for record in records:
        evaluator = LambdaEvaluator(model, record.state)
        k = selection_index_for(evaluator, point)
        best: tuple[float, BetheState | None] = (math.inf, None)
        for outcome in solve_many(point, params, seeds, [k], workers):
            if outcome.state is None:
                continue
            deviation = lambda_deviation(outcome.state, point, params, evaluator)
            if deviation < best[0]:
                best = (deviation, outcome.state)
            if deviation < BAE_MATCH_RTOL:
                break
        state = best[1] if best[0] < BAE_MATCH_RTOL else None
        matches.append(StateMatch(record.index, record.energy, state, best[0]))
        if state is None:
            _LOGGER.warning("No Bethe state reproduces level %d at E=%.10g (best %.3e)", record.index, record.energy, best[0])
    return matches
