"""Run configuration for the command-line driver."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import voluptuous as vol

from .const import (
    COMMANDS,
    CONF_COMMAND,
    CONF_ETA,
    CONF_ETA_SWEEP,
    CONF_FORMAT,
    CONF_K,
    CONF_KMAX,
    CONF_L,
    CONF_N1,
    CONF_N_SITES,
    CONF_OUT,
    CONF_REGIME,
    CONF_SIZES,
    CONF_STATE,
    CONF_TAU,
    CONF_TAU_SWEEP,
    CONF_TWIST,
    CONF_WORKERS,
    DEFAULT_ETA,
    DEFAULT_N_SITES,
    DEFAULT_TAU,
    OUTPUT_FORMATS,
)
from .elliptic import EllipticParams
from .exceptions import ConfigError, ParameterError
from .model import BoundaryTwist
from .spectrum import StateChoice
from .thermo import AUTO

_LOGGER = logging.getLogger(__name__)


def parse_complex(text: str | complex | float) -> complex:
    """
    Parse "a+bi" text such as "0.7", "0.4i", "i" or "0.1-0.2i".

    Raises:
        vol.Invalid: If the text is not a complex literal
    """
    if isinstance(text, (int, float, complex)):
        return complex(text)
    literal = str(text).strip().replace(" ", "").lower()
    if not literal:
        raise vol.Invalid("empty complex literal")
    if literal.endswith("i"):
        body = literal[:-1]
        if body in ("", "+", "-") or body[-1] in "+-":
            body += "1"
        literal = body + "j"
    try:
        return complex(literal)
    except ValueError as err:
        raise vol.Invalid(f"{text!r} is not a complex literal of the form a+bi") from err


def parse_sweep(text: str) -> list[float]:
    """
    Parse "start:stop:step"; the stop value is included within half a step.

    Raises:
        vol.Invalid: On malformed text or a non-positive step
    """
    parts = str(text).split(":")
    if len(parts) != 3:
        raise vol.Invalid(f"{text!r} is not start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as err:
        raise vol.Invalid(f"{text!r} holds a non-numeric bound") from err
    if step <= 0 or stop < start:
        raise vol.Invalid(f"{text!r} needs step > 0 and stop >= start")
    count = math.floor((stop - start) / step + 0.5)
    return [round(start + i * step, 12) for i in range(count + 1)]


def parse_sizes(text: str | list[int]) -> list[int]:
    """Parse a comma separated list of chain lengths."""
    if isinstance(text, list):
        return [int(n) for n in text]
    try:
        sizes = [int(item) for item in str(text).split(",") if item.strip()]
    except ValueError as err:
        raise vol.Invalid(f"{text!r} is not a comma separated list of integers") from err
    if not sizes or any(n < 2 for n in sizes):
        raise vol.Invalid(f"Sizes {text!r} must be integers >= 2")
    return sizes


def parse_kmax(value: Any) -> int | str:
    """Accept a positive integer or 'auto'."""
    if isinstance(value, str) and value.strip().lower() == AUTO:
        return AUTO
    try:
        kmax = int(value)
    except (TypeError, ValueError) as err:
        raise vol.Invalid(f"kmax must be a positive integer or 'auto', got {value!r}") from err
    if kmax < 1:
        raise vol.Invalid(f"kmax must be positive, got {kmax}")
    return kmax


def _twist(value: Any) -> BoundaryTwist:
    if isinstance(value, BoundaryTwist):
        return value
    try:
        return BoundaryTwist.from_text(str(value))
    except ParameterError as err:
        raise vol.Invalid(str(err)) from err


RUN_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_COMMAND): vol.In(COMMANDS),
        vol.Optional(CONF_TAU, default=DEFAULT_TAU): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Optional(CONF_ETA, default=DEFAULT_ETA): parse_complex,
        vol.Optional(CONF_N_SITES, default=DEFAULT_N_SITES): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_SIZES, default=None): vol.Any(None, parse_sizes),
        vol.Optional(CONF_TWIST, default="p"): _twist,
        vol.Optional(CONF_STATE, default=StateChoice.GROUND.value): vol.In([c.value for c in StateChoice]),
        vol.Optional(CONF_KMAX, default=AUTO): parse_kmax,
        vol.Optional(CONF_OUT, default=None): vol.Any(None, str),
        vol.Optional(CONF_FORMAT, default="json"): vol.In(OUTPUT_FORMATS),
        vol.Optional(CONF_REGIME, default=None): vol.Any(None, vol.In(("real", "imag"))),
        vol.Optional(CONF_ETA_SWEEP, default=None): vol.Any(None, parse_sweep),
        vol.Optional(CONF_TAU_SWEEP, default=None): vol.Any(None, parse_sweep),
        vol.Optional(CONF_WORKERS, default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_L, default=0): vol.Coerce(int),
        vol.Optional(CONF_K, default=0): vol.Coerce(int),
        vol.Optional(CONF_N1, default=None): vol.Any(None, vol.All(vol.Coerce(int), vol.Range(min=0))),
    }
)


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI run."""

    command: str
    tau_im: float
    eta: complex
    n_sites: int
    twist: BoundaryTwist
    state: str
    kmax: int | str
    out_path: str | None
    format: str
    regime: str | None = None
    eta_sweep: list[float] | None = field(default=None, compare=False)
    tau_sweep: list[float] | None = field(default=None, compare=False)
    sizes: list[int] | None = field(default=None, compare=False)
    workers: int = 1
    L: int = 0
    K: int = 0
    n1: int | None = None

    @property
    def tau(self) -> complex:
        """Return tau = i tau_im."""
        return 1j * self.tau_im

    @property
    def params(self) -> EllipticParams:
        """Return the elliptic parameters of the single-point commands."""
        return EllipticParams(self.tau, self.eta)

    def sweep_points(self) -> list[EllipticParams]:
        """Return the parameter points of a thermo sweep, or the single point."""
        if self.eta_sweep is not None:
            real = self.regime != "imag"
            return [EllipticParams(self.tau, value if real else 1j * value) for value in self.eta_sweep]
        if self.tau_sweep is not None:
            return [EllipticParams(1j * value, self.eta) for value in self.tau_sweep]
        return [self.params]


def build_config(raw: dict[str, Any]) -> RunConfig:
    """
    Validate raw settings and check the physical parameters up front.

    Raises:
        ConfigError: On schema violations or inadmissible tau, eta
    """
    try:
        data = RUN_SCHEMA(raw)
    except vol.Invalid as err:
        raise ConfigError(f"Invalid configuration: {err}") from err

    if data[CONF_ETA_SWEEP] is not None and data[CONF_TAU_SWEEP] is not None:
        raise ConfigError("Give at most one of eta_sweep and tau_sweep")
    if data[CONF_FORMAT] != "json" and data[CONF_OUT] is None:
        raise ConfigError(f"Format {data[CONF_FORMAT]} needs an output path")
    if data[CONF_FORMAT] == "dat" and data[CONF_COMMAND] != "zeros":
        raise ConfigError("The dat scatter format only applies to zeros")
    if data[CONF_SIZES] and len({n % 2 for n in data[CONF_SIZES]}) > 1:
        raise ConfigError(f"Sizes {data[CONF_SIZES]} mix even and odd chains")
    config = RunConfig(**data)

    try:
        if config.command == "thermo":
            config.sweep_points()
        elif config.command != "bae":
            _ = config.params
    except ParameterError as err:
        raise ConfigError(f"Inadmissible parameters: {err}") from err
    _LOGGER.debug("Run configuration: %s", config)
    return config
