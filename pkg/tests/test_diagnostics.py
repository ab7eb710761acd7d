"""Tests for result payloads and the identity battery."""
from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from xyzchain.bae import StateMatch, degenerate_eta
from xyzchain.diagnostics import (
    BATTERY_POINTS,
    ELLIPTIC_RTOL,
    FUNCTIONAL_RTOL,
    bethe_payload,
    elliptic_identity_residuals,
    functional_residuals,
    generation_residual,
    identity_battery,
    integrability_residuals,
    make_json_safe,
    round_sig,
    write_csv,
    write_json,
)
from xyzchain.elliptic import EllipticParams, Regime
from xyzchain.model import BoundaryTwist
from xyzchain.spectrum import StateChoice


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig(0.0) == 0.0
    assert np.isnan(round_sig(float("nan")))


def test_make_json_safe():
    payload = make_json_safe(
        {"z": 0.1 + 2j / 3, "n": np.int64(3), "arr": np.array([1.0, 2.5]), "state": StateChoice.GROUND, "ok": np.bool_(True)}
    )
    assert payload == {"z": {"re": 0.1, "im": 0.666666666667}, "n": 3, "arr": [1.0, 2.5], "state": "ground", "ok": True}
    json.dumps(payload)


def test_writers(tmp_path):
    path = write_json({"value": 1 / 7}, tmp_path / "nested" / "out.json")
    assert json.loads(path.read_text()) == {"value": 0.142857142857}
    rows = [{"a": 1, "b": 0.5}, {"a": 2, "b": 1 / 3}]
    path = write_csv(rows, tmp_path / "out.csv", ("a", "b"))
    with path.open(newline="") as handle:
        read = list(csv.DictReader(handle))
    assert read[1] == {"a": "2", "b": "0.333333333333"}


def test_bethe_payload_for_unmatched_level():
    point = degenerate_eta(-1, 0, 2, 2, BoundaryTwist.X, 0.6j)
    payload = bethe_payload(point, point.params, [StateMatch(0, -1.5, None, float("inf"))])
    assert payload["point"]["twist"] == "x"
    assert payload["point"]["regime"] == point.regime.value
    assert payload["matches"] == [{"record_index": 0, "energy": -1.5, "deviation": None, "matched": False}]


def test_elliptic_identities(params):
    residuals = elliptic_identity_residuals(params, samples=40)
    for name in ("riemann", "double_angle", "theta_factorization_sigma", "theta_factorization_odd", "theta_factorization_even"):
        assert residuals[name] < ELLIPTIC_RTOL, name
    assert residuals["quasi_period_one"] < 1e-12
    assert residuals["jtheta_oracle"] < 1e-12


def test_integrability(params):
    residuals = integrability_residuals(params, n_sites=4)
    assert residuals["qybe"] < 1e-10
    assert residuals["transfer_commutator"] < 1e-9
    assert residuals["twist_commutator"] < 1e-10
    assert generation_residual(params) < 1e-6


def test_functional_relations(params):
    for name, value in functional_residuals(params).items():
        assert value < FUNCTIONAL_RTOL, name


def test_battery_points_cover_every_regime():
    assert {EllipticParams(1j * tau_im, eta).regime for tau_im, eta in BATTERY_POINTS} == set(Regime)


@pytest.mark.slow
def test_identity_battery_passes():
    results = identity_battery()
    assert results["passed"]
    assert {key.split(".")[0] for key in results if "." in key} == {regime.value for regime in Regime}
