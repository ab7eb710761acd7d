"""Tests for run configuration parsing."""
from __future__ import annotations

import pytest
import voluptuous as vol

from xyzchain.config import build_config, parse_complex, parse_kmax, parse_sizes, parse_sweep
from xyzchain.const import CONF_COMMAND, CONF_ETA, CONF_ETA_SWEEP, CONF_FORMAT, CONF_REGIME, CONF_SIZES, CONF_TAU_SWEEP
from xyzchain.exceptions import ConfigError
from xyzchain.model import BoundaryTwist
from xyzchain.thermo import AUTO


@pytest.mark.parametrize(
    ("text", "expected"),
    [("0.7", 0.7), ("0.4i", 0.4j), ("i", 1j), ("-i", -1j), ("0.1-0.2i", 0.1 - 0.2j), ("1e-3i", 1e-3j), (0.5, 0.5)],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["", "abc", "0.3k"])
def test_parse_complex_rejects(text):
    with pytest.raises(vol.Invalid):
        parse_complex(text)


def test_parse_sweep():
    assert parse_sweep("0.55:0.95:0.1") == [0.55, 0.65, 0.75, 0.85, 0.95]
    with pytest.raises(vol.Invalid):
        parse_sweep("0.5:0.9")
    with pytest.raises(vol.Invalid):
        parse_sweep("0.5:0.9:0")


def test_parse_sizes_and_kmax():
    assert parse_sizes("6,8, 10") == [6, 8, 10]
    with pytest.raises(vol.Invalid):
        parse_sizes("6,1")
    assert parse_kmax("auto") == AUTO
    assert parse_kmax("200") == 200
    with pytest.raises(vol.Invalid):
        parse_kmax(0)


def test_defaults():
    config = build_config({CONF_COMMAND: "spectrum"})
    assert config.tau == 0.6j
    assert config.eta == 0.7
    assert config.n_sites == 6
    assert config.twist is BoundaryTwist.PERIODIC
    assert config.params.is_real_eta


def test_imaginary_eta_sweep():
    config = build_config({CONF_COMMAND: "thermo", CONF_ETA_SWEEP: "0.2:0.4:0.1", CONF_REGIME: "imag"})
    points = config.sweep_points()
    assert [p.eta for p in points] == pytest.approx([0.2j, 0.3j, 0.4j])


@pytest.mark.parametrize(
    "raw",
    [
        {CONF_COMMAND: "plot"},
        {CONF_COMMAND: "spectrum", CONF_ETA: "1.5"},
        {CONF_COMMAND: "spectrum", CONF_ETA: "0.3+0.1i"},
        {CONF_COMMAND: "thermo", CONF_ETA_SWEEP: "0.5:0.6:0.1", CONF_TAU_SWEEP: "0.5:0.6:0.1"},
        {CONF_COMMAND: "spectrum", CONF_FORMAT: "csv"},
        {CONF_COMMAND: "spectrum", CONF_FORMAT: "dat", "out_path": "levels.dat"},
        {CONF_COMMAND: "compare", CONF_SIZES: "4,5,6"},
    ],
)
def test_invalid_configurations(raw):
    with pytest.raises(ConfigError):
        build_config(raw)


def test_sizes_of_one_parity():
    assert build_config({CONF_COMMAND: "compare", CONF_SIZES: "5,7,9"}).sizes == [5, 7, 9]
