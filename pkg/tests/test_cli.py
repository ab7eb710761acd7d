"""Tests for the command-line driver."""
from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from xyzchain.cli import main
from xyzchain.const import EXIT_OK, EXIT_USAGE
from xyzchain.thermo import SWEEP_HEADER


def test_spectrum_json(tmp_path):
    out = tmp_path / "spectrum.json"
    assert main(["spectrum", "--N", "4", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["N"] == 4
    assert len(payload["levels"]) == 16
    assert payload["summary"]["gap"] >= 0


def test_zeros_document(tmp_path):
    out = tmp_path / "zeros.json"
    assert main(["zeros", "--N", "4", "--tau", "1.6", "--eta", "1.0i", "--twist", "z", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert set(payload) == {"N", "tau_im", "eta_re", "eta_im", "twist", "state", "zeros", "M1", "M2", "residual_max"}
    assert payload["twist"] == "z"
    assert payload["eta_im"] == 1.0
    assert len(payload["zeros"]) == 4
    assert all(set(zero) == {"re", "im", "label"} for zero in payload["zeros"])


def test_zeros_scatter(tmp_path):
    out = tmp_path / "zeros.dat"
    assert main(["zeros", "--N", "4", "--format", "dat", "--out", str(out)]) == EXIT_OK
    assert np.loadtxt(out).shape == (4, 2)


def test_thermo_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["thermo", "--eta-sweep", "0.55:0.75:0.1", "--twist", "y", "--format", "csv", "--out", str(out)]
    assert main(args) == EXIT_OK
    with out.open(newline="") as handle:
        rows = list(csv.reader(handle))
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 7


def test_stdout_json(capsys):
    assert main(["spectrum", "--N", "3", "--twist", "x"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["twist"] == "x"


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--eta", "2"],
        ["spectrum", "--twist", "w"],
        ["thermo", "--eta-sweep", "0.5:0.6:0.1", "--tau-sweep", "0.5:0.7:0.1"],
        ["bae", "--N", "4", "--N1", "2"],
        ["compare", "--sizes", "4,5,6"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unknown_command_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == EXIT_USAGE
