"""Result payloads, file writers and the identity battery."""
from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import mpmath
import numpy as np

from .bae import DegeneratePoint, StateMatch
from .const import ROUND_DIGITS
from .elliptic import EVEN_CHAR, SIGMA_CHAR, EllipticParams
from .model import (
    BoundaryTwist,
    SpinChainModel,
    hamiltonian,
    hamiltonian_from_transfer,
    hamiltonian_symmetry_residuals,
    qybe_residual,
    transfer_matrix,
    twist_operator,
    z2_residual,
)
from .spectrum import SpectrumRecord, spectrum_summary, transfer_eigenstates
from .zeros import ZeroSet, verify_functional_relations

_LOGGER = logging.getLogger(__name__)

_FLOOR = np.finfo(float).tiny

# identity battery thresholds
ELLIPTIC_RTOL = 1e-11
QUASI_PERIOD_RTOL = 1e-12
ORACLE_RTOL = 1e-12
QYBE_TOL = 1e-10
COMMUTATOR_RTOL = 1e-9
TWIST_COMMUTATOR_TOL = 1e-10
GENERATION_RTOL = 1e-6
FUNCTIONAL_RTOL = 1e-7
SYMMETRY_TOL = 1e-10

BATTERY_POINTS = ((0.6, 0.7), (0.6, 0.3), (1.6, 1j), (1.6, 0.4j))
FUNCTIONAL_KEYS = ("fusion_at_theta", "product_at_theta", "quasi_period_one", "quasi_period_tau")


def round_sig(value: float, digits: int = ROUND_DIGITS) -> float:
    """Round to a fixed number of significant digits."""
    if not math.isfinite(value) or value == 0:
        return value
    return float(f"{value:.{digits}g}")


def make_json_safe(obj: Any) -> Any:
    """Convert nested results into JSON types, rounding floats to ROUND_DIGITS significant digits."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): make_json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [make_json_safe(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return round_sig(float(obj))
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": round_sig(float(obj.real)), "im": round_sig(float(obj.imag))}
    if isinstance(obj, np.ndarray):
        return make_json_safe(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(payload: Any, path: Path | str) -> Path:
    """Write a payload as sorted, indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(make_json_safe(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")
    _LOGGER.info("Wrote %s", path)
    return path


def write_csv(rows: Iterable[dict[str, Any]], path: Path | str, header: Sequence[str]) -> Path:
    """Write rows in the given column order with rounded floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(header))
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row.get(key)) for key in header})
    _LOGGER.info("Wrote %s", path)
    return path


def _csv_cell(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (float, np.floating)):
        return repr(round_sig(float(value)))
    return value


def write_scatter(zset: ZeroSet, path: Path | str) -> Path:
    """Write the zeros as two plot-ready columns in domain coordinates."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([[w.real for w in zset.zeros], [w.imag for w in zset.zeros]])
    np.savetxt(path, data, fmt=f"%.{ROUND_DIGITS}g", header="x y")
    _LOGGER.info("Wrote %s", path)
    return path


def zero_set_payload(zset: ZeroSet, model: SpinChainModel, state: str) -> dict[str, Any]:
    """Return the ZeroSet JSON document."""
    params = model.params
    labels = zset.labels or ("",) * zset.n_zeros
    return {
        "N": model.n_sites,
        "tau_im": params.tau_im,
        "eta_re": params.eta.real,
        "eta_im": params.eta.imag,
        "twist": model.twist.value,
        "state": state,
        "zeros": [{"re": w.real, "im": w.imag, "label": label} for w, label in zip(zset.zeros, labels)],
        "M1": zset.m1,
        "M2": zset.m2,
        "residual_max": zset.residual_max,
    }


def spectrum_payload(records: Sequence[SpectrumRecord], model: SpinChainModel) -> dict[str, Any]:
    """Return the spectrum of one chain for reporting."""
    return {
        "N": model.n_sites,
        "tau_im": model.params.tau_im,
        "eta_re": model.params.eta.real,
        "eta_im": model.params.eta.imag,
        "twist": model.twist.value,
        "summary": spectrum_summary(records),
        "levels": [
            {
                "index": rec.index,
                "energy": rec.energy,
                "twist_charge": rec.twist_charge,
                "degeneracy_group": rec.degeneracy_group,
            }
            for rec in records
        ],
    }


def bethe_payload(point: DegeneratePoint, params: EllipticParams, matches: Sequence[StateMatch]) -> dict[str, Any]:
    """Return matched Bethe states with their degenerate-point provenance."""
    entries = []
    for match in matches:
        entry: dict[str, Any] = {
            "record_index": match.record_index,
            "energy": match.energy,
            "deviation": match.deviation if math.isfinite(match.deviation) else None,
            "matched": match.state is not None,
        }
        if match.state is not None:
            state = match.state
            entry["state"] = {
                "roots": list(state.roots),
                "lambdas": list(state.lambdas(params)),
                "phi": state.phi,
                "selection_index": state.selection_index,
                "residual": state.residual,
                "selection_residual": state.selection_residual,
                "seed": [list(s) for s in state.seed],
            }
        entries.append(entry)
    return {
        "point": {
            "L": point.L,
            "K": point.K,
            "N": point.n_sites,
            "N1": point.n1,
            "twist": point.twist.value,
            "tau_im": point.tau.imag,
            "eta": point.eta_value,
            "regime": point.regime.value,
        },
        "matches": entries,
    }


def _scaled(defect: complex, *terms: complex) -> float:
    return abs(defect) / max(max(abs(t) for t in terms), _FLOOR)


def _random_points(rng: np.random.Generator, tau_im: float, count: int) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, count) + 1j * tau_im * rng.uniform(-0.25, 0.25, count)


def elliptic_identity_residuals(params: EllipticParams, samples: int = 200, seed: int = 11) -> dict[str, float]:
    """Return the worst relative residuals of the sigma identities on random points."""
    rng = np.random.default_rng(seed)
    tau = params.tau
    sig = params.sigma
    u, v, x, y = (_random_points(rng, params.tau_im, samples) for _ in range(4))

    first = sig(u + x) * sig(u - x) * sig(v + y) * sig(v - y)
    second = sig(u + y) * sig(u - y) * sig(v + x) * sig(v - x)
    rhs = sig(u + v) * sig(u - v) * sig(x + y) * sig(x - y)
    riemann = max(_scaled(a - b - c, a, b, c) for a, b, c in zip(first, second, rhs))

    half = (1 + tau) / 2
    doubled = sig(2 * u)
    product = 2 * sig(u) * sig(u + 0.5) * sig(u + tau / 2) * sig(u - half) / (sig(0.5) * sig(tau / 2) * sig(-half))
    double_angle = max(_scaled(a - b, a, b) for a, b in zip(doubled, product))

    mod = 2 * tau
    odd, even = params.theta(SIGMA_CHAR, u, mod), params.theta(EVEN_CHAR, u, mod)
    split = odd * even / (params.theta(SIGMA_CHAR, tau / 2, mod) * params.theta(EVEN_CHAR, tau / 2, mod))
    factor_sigma = max(_scaled(a - b, a, b) for a, b in zip(sig(u) / sig(tau / 2), split))

    odd_double = params.theta(SIGMA_CHAR, 2 * u, mod)
    odd_product = params.theta(SIGMA_CHAR, tau, mod) * sig(u) * sig(u + 0.5) / (sig(tau / 2) * sig(tau / 2 + 0.5))
    factor_odd = max(_scaled(a - b, a, b) for a, b in zip(odd_double, odd_product))

    even_double = params.theta(EVEN_CHAR, 2 * u, mod)
    even_product = (
        params.theta(EVEN_CHAR, 0.0, mod) * sig(u - tau / 2) * sig(u + half) / (sig(-tau / 2) * sig(tau / 2 + 0.5))
    )
    factor_even = max(_scaled(a - b, a, b) for a, b in zip(even_double, even_product))

    shift_one = max(_scaled(a + b, a, b) for a, b in zip(sig(u + 1), sig(u)))
    shift_tau = max(
        _scaled(a + np.exp(-2j * math.pi * (w + tau / 2)) * b, a, b) for w, a, b in zip(u, sig(u + tau), sig(u))
    )

    q = mpmath.exp(1j * mpmath.pi * tau)
    oracle = max(
        _scaled(complex(a) + complex(mpmath.jtheta(1, mpmath.pi * complex(w), q)), a)
        for w, a in zip(u[:20], sig(u[:20]))
    )
    return {
        "riemann": riemann,
        "double_angle": double_angle,
        "theta_factorization_sigma": factor_sigma,
        "theta_factorization_odd": factor_odd,
        "theta_factorization_even": factor_even,
        "quasi_period_one": shift_one,
        "quasi_period_tau": shift_tau,
        "jtheta_oracle": oracle,
    }


def integrability_residuals(params: EllipticParams, n_sites: int = 6, seed: int = 13) -> dict[str, float]:
    """Return QYBE, Z2, transfer commutator and twist commutator residuals."""
    rng = np.random.default_rng(seed)
    triples = _random_points(rng, params.tau_im, 60).reshape(20, 3)
    qybe = max(qybe_residual(*triple, params) for triple in triples)
    z2 = max(z2_residual(u, params) for u in triples[:, 0])

    u, v = _random_points(rng, params.tau_im, 2)
    commutator = 0.0
    twist_commutator = 0.0
    for twist in BoundaryTwist:
        model = SpinChainModel(n_sites, params, twist)
        t_u, t_v = transfer_matrix(u, model), transfer_matrix(v, model)
        scale = np.linalg.norm(t_u) * np.linalg.norm(t_v)
        commutator = max(commutator, float(np.linalg.norm(t_u @ t_v - t_v @ t_u) / max(scale, _FLOOR)))
        u_op = twist_operator(twist, n_sites).toarray()
        twist_commutator = max(
            twist_commutator, float(np.linalg.norm(t_u @ u_op - u_op @ t_u) / max(np.linalg.norm(t_u), _FLOOR))
        )
    return {"qybe": qybe, "z2": z2, "transfer_commutator": commutator, "twist_commutator": twist_commutator}


def generation_residual(params: EllipticParams, n_sites: int = 4) -> float:
    """Return max |H_from_t - H| over the twists, relative to the spectral norm of H."""
    worst = 0.0
    for twist in BoundaryTwist:
        model = SpinChainModel(n_sites, params, twist)
        direct = hamiltonian(model).toarray()
        rebuilt = hamiltonian_from_transfer(model)
        worst = max(worst, float(np.max(np.abs(rebuilt - direct)) / max(np.linalg.norm(direct, 2), _FLOOR)))
    return worst


def functional_residuals(params: EllipticParams, n_sites: int = 3, spread: float = 0.05, seed: int = 17) -> dict[str, float]:
    """Return the worst functional-relation residuals over all twists on a random inhomogeneous chain."""
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-spread, spread, n_sites)
    thetas = tuple(1j * offsets) if params.is_real_eta else tuple(offsets.astype(complex))
    worst = {key: 0.0 for key in FUNCTIONAL_KEYS}
    for twist in BoundaryTwist:
        model = SpinChainModel(n_sites, params, twist, thetas)
        for evaluator in transfer_eigenstates(model):
            report = verify_functional_relations(evaluator)
            for key in FUNCTIONAL_KEYS:
                worst[key] = max(worst[key], report.get(key, 0.0))
    return worst


def _check(residual: float, threshold: float) -> dict[str, Any]:
    return {"residual": residual, "threshold": threshold, "passed": bool(residual < threshold)}


def identity_battery(points: Sequence[tuple[float, complex]] = BATTERY_POINTS, n_sites: int = 6) -> dict[str, Any]:
    """
    Run the elliptic, integrability, generation and functional-relation checks.

    Args:
        points: (Im tau, eta) pairs, one per regime
        n_sites: Chain length of the transfer-matrix commutator checks

    Returns:
        Mapping from check name to residual, threshold and pass flag, plus
        an overall "passed"
    """
    results: dict[str, Any] = {}
    for tau_im, eta in points:
        params = EllipticParams(1j * tau_im, eta)
        tag = params.regime.value
        for name, value in elliptic_identity_residuals(params).items():
            threshold = QUASI_PERIOD_RTOL if name.startswith("quasi") else ORACLE_RTOL if name == "jtheta_oracle" else ELLIPTIC_RTOL
            results[f"{tag}.{name}"] = _check(value, threshold)
        integrability = integrability_residuals(params, n_sites)
        results[f"{tag}.qybe"] = _check(integrability["qybe"], QYBE_TOL)
        results[f"{tag}.z2"] = _check(integrability["z2"], QYBE_TOL)
        results[f"{tag}.transfer_commutator"] = _check(integrability["transfer_commutator"], COMMUTATOR_RTOL)
        results[f"{tag}.twist_commutator"] = _check(integrability["twist_commutator"], TWIST_COMMUTATOR_TOL)
        results[f"{tag}.hamiltonian_generation"] = _check(generation_residual(params), GENERATION_RTOL)
        for name, value in functional_residuals(params).items():
            results[f"{tag}.{name}"] = _check(value, FUNCTIONAL_RTOL)
        symmetry = hamiltonian_symmetry_residuals(SpinChainModel(4, params))
        for name, value in symmetry.items():
            results[f"{tag}.hamiltonian_{name}"] = _check(value, SYMMETRY_TOL)

    passed = all(entry["passed"] for entry in results.values())
    failed = [name for name, entry in results.items() if not entry["passed"]]
    if failed:
        _LOGGER.warning("Identity battery failures: %s", ", ".join(failed))
    results["passed"] = passed
    return results
