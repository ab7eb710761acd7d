"""Command-line driver for the XYZ chain tools."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Callable, Sequence

from .bae import degenerate_eta, match_spectrum
from .config import RunConfig, build_config
from .const import (
    BAE_REPORT_LEVELS,
    COMMANDS,
    COMPARE_RTOL,
    DEFAULT_ETA,
    DEFAULT_N_SITES,
    DEFAULT_SIZES,
    DEFAULT_TAU,
    FULL_SPECTRUM_SITES,
    ENERGY_CERT_TOL,
    EXIT_CERTIFICATION,
    EXIT_OK,
    EXIT_USAGE,
    OUTPUT_FORMATS,
    SPARSE_LEVELS,
)
from .diagnostics import (
    bethe_payload,
    identity_battery,
    make_json_safe,
    spectrum_payload,
    write_csv,
    write_json,
    write_scatter,
    zero_set_payload,
)
from .exceptions import CertificationError, ParameterError, XYZChainError
from .model import SpinChainModel
from .spectrum import LambdaEvaluator, diagonalize, select_states
from .thermo import (
    SWEEP_HEADER,
    Parity,
    energy_density,
    extrapolate,
    ground_state_energy_estimate,
    sweep,
)
from .zeros import energy_from_zeros, find_zeros

_LOGGER = logging.getLogger(__name__)

COMPARE_HEADER = ("N", "E_diag", "E_estimate", "difference")
ZERO_HEADER = ("re", "im", "label")
SPECTRUM_HEADER = ("index", "energy", "twist_charge", "degeneracy_group")


def _levels(n_sites: int) -> int | None:
    return None if n_sites <= FULL_SPECTRUM_SITES else SPARSE_LEVELS


def _emit(payload: dict[str, Any], config: RunConfig, rows: Sequence[dict[str, Any]] = (), header: Sequence[str] = ()) -> None:
    if config.out_path is None:
        print(json.dumps(make_json_safe(payload), indent=2, sort_keys=True))
    elif config.format == "csv":
        write_csv(rows, config.out_path, header)
    else:
        write_json(payload, config.out_path)


def run_spectrum(config: RunConfig) -> int:
    """Diagonalize one chain and report its levels."""
    model = SpinChainModel(config.n_sites, config.params, config.twist)
    records = diagonalize(model, _levels(config.n_sites))
    payload = spectrum_payload(records, model)
    _emit(payload, config, payload["levels"], SPECTRUM_HEADER)
    return EXIT_OK


def run_zeros(config: RunConfig) -> int:
    """
    Locate and classify the zeros of Lambda for the chosen state.

    Raises:
        CertificationError: If the energy from the zeros misses the
            diagonalization energy
    """
    model = SpinChainModel(config.n_sites, config.params, config.twist)
    records = diagonalize(model, _levels(config.n_sites))
    record = select_states(records, config.state)
    zset = find_zeros(LambdaEvaluator(model, record.state))
    energy = energy_from_zeros(zset, model)
    difference = abs(energy - record.energy)
    if difference > ENERGY_CERT_TOL * max(1.0, abs(record.energy)):
        raise CertificationError(
            f"Energy from zeros {energy:.12g} differs from diagonalization {record.energy:.12g} by {difference:.3e}"
        )
    _LOGGER.info("Energy from zeros agrees with diagonalization to %.2e", difference)

    payload = zero_set_payload(zset, model, config.state)
    if config.format == "dat":
        write_scatter(zset, config.out_path)
    else:
        _emit(payload, config, payload["zeros"], ZERO_HEADER)
    return EXIT_OK


def run_thermo(config: RunConfig) -> int:
    """Evaluate the thermodynamic quantities over the configured points."""
    rows = sweep(config.sweep_points(), [config.twist], list(Parity), config.kmax, config.workers)
    _emit({"rows": rows}, config, rows, SWEEP_HEADER)
    return EXIT_OK


def run_compare(config: RunConfig) -> int:
    """
    Extrapolate finite-size ground energies and compare with the energy density.

    Raises:
        CertificationError: If the fitted slope misses the energy density
    """
    params = config.params
    sizes = config.sizes or list(DEFAULT_SIZES)
    density = energy_density(params, kmax=config.kmax)
    energies: dict[int, float] = {}
    rows = []
    for n_sites in sizes:
        model = SpinChainModel(n_sites, params, config.twist)
        ground = select_states(diagonalize(model, _levels(n_sites)), "ground").energy
        estimate = ground_state_energy_estimate(params, None, config.twist, n_sites, config.kmax)
        energies[n_sites] = ground
        rows.append({"N": n_sites, "E_diag": ground, "E_estimate": estimate, "difference": ground - estimate})

    fit = extrapolate(energies, Parity.of(sizes[0]))
    relative = abs(fit.slope - density) / max(abs(density), 1e-300)
    _emit({"energy_density": density, "fit": fit._asdict(), "relative_error": relative, "rows": rows}, config, rows, COMPARE_HEADER)
    if relative > COMPARE_RTOL:
        raise CertificationError(f"Extrapolated slope {fit.slope:.8g} misses energy density {density:.8g} ({relative:.2e})")
    return EXIT_OK


def run_bae(config: RunConfig) -> int:
    """
    Solve the Bethe equations at a degenerate point and match the lowest levels.

    Raises:
        CertificationError: If no level is reproduced by a Bethe state
    """
    n1 = config.n_sites if config.n1 is None else config.n1
    point = degenerate_eta(config.L, config.K, config.n_sites, n1, config.twist, config.tau)
    params = point.params
    model = SpinChainModel(config.n_sites, params, config.twist)
    records = sorted(diagonalize(model), key=lambda rec: (rec.energy, rec.index))[:BAE_REPORT_LEVELS]
    matches = match_spectrum(point, params, records, workers=config.workers)
    _emit(bethe_payload(point, params, matches), config)
    matched = sum(1 for match in matches if match.state is not None)
    _LOGGER.info("Bethe states reproduce %d of %d levels at eta=%s", matched, len(matches), point.eta_value)
    if not matched:
        raise CertificationError(f"No level matched a Bethe state at eta={point.eta_value}")
    return EXIT_OK


def run_identities(config: RunConfig) -> int:
    """Run the identity battery; the exit code is the conjunction of all checks."""
    results = identity_battery(n_sites=config.n_sites)
    _emit(results, config)
    return EXIT_OK if results["passed"] else EXIT_CERTIFICATION


COMMAND_HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "spectrum": run_spectrum,
    "zeros": run_zeros,
    "thermo": run_thermo,
    "compare": run_compare,
    "bae": run_bae,
    "identities": run_identities,
}


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    p = argparse.ArgumentParser(prog="xyzchain", description="Spectrum, zeros and thermodynamics of the twisted XYZ chain.")
    p.add_argument("command", choices=COMMANDS, help="What to compute.")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, dest="tau_im", help=f"Im(tau) (default: {DEFAULT_TAU}).")
    p.add_argument("--eta", default=DEFAULT_ETA, help="Crossing parameter as a+bi (default: %(default)s).")
    p.add_argument("--N", type=int, default=DEFAULT_N_SITES, dest="n_sites", help="Number of sites (default: %(default)s).")
    p.add_argument("--sizes", default=None, help="Comma separated chain lengths for compare.")
    p.add_argument("--twist", default="p", help="Boundary twist p, x, y or z (default: p).")
    p.add_argument("--state", default="ground", choices=("ground", "first"), help="State for zeros.")
    p.add_argument("--kmax", default="auto", help="Series cap or 'auto' (default: auto).")
    p.add_argument("--out", default=None, dest="out_path", help="Output path; JSON goes to stdout if omitted.")
    p.add_argument("--format", default="json", choices=OUTPUT_FORMATS, help="Output format (default: json).")
    p.add_argument("--regime", default=None, choices=("real", "imag"), help="Axis of an eta sweep.")
    p.add_argument("--eta-sweep", default=None, dest="eta_sweep", help="start:stop:step sweep of the eta scale.")
    p.add_argument("--tau-sweep", default=None, dest="tau_sweep", help="start:stop:step sweep of Im(tau).")
    p.add_argument("--workers", type=int, default=1, help="Process pool size (default: 1).")
    p.add_argument("--L", type=int, default=0, dest="L", help="Degenerate point integer L.")
    p.add_argument("--K", type=int, default=0, dest="K", help="Degenerate point integer K.")
    p.add_argument("--N1", type=int, default=None, dest="n1", help="Number of Bethe roots (default: N).")
    p.add_argument("-v", "--verbose", action="count", default=0, help="Increase log verbosity.")
    return p


def run(config: RunConfig) -> int:
    """
    Execute one validated run and map failures to exit codes.

    Returns:
        EXIT_OK, EXIT_CERTIFICATION on a failed numerical check, or
        EXIT_USAGE on inadmissible parameters
    """
    try:
        return COMMAND_HANDLERS[config.command](config)
    except ParameterError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except XYZChainError as err:
        _LOGGER.error("%s failed: %s", config.command, err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CERTIFICATION


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, validate them and run."""
    args = vars(build_parser().parse_args(argv))
    verbosity = args.pop("verbose")
    logging.basicConfig(
        level=logging.WARNING - 10 * min(verbosity, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    raw = {key: value for key, value in args.items() if value is not None}
    try:
        config = build_config(raw)
    except ParameterError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
