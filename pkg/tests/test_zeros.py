"""Tests for the zero search, classification and energy from zeros."""
from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from xyzchain.elliptic import EllipticParams, Regime
from xyzchain.exceptions import IntegerRecoveryError
from xyzchain.model import BoundaryTwist, SpinChainModel
from xyzchain.spectrum import LambdaEvaluator, diagonalize, select_states, transfer_eigenstates
from xyzchain.thermo import Parity, gap_is_finite
from xyzchain.zeros import (
    ANOMALOUS,
    EtaAxis,
    FundamentalDomain,
    ZeroSet,
    balance_checks,
    classify,
    energy_from_zeros,
    find_zeros,
    lambda0,
    partner_defect,
    reconstruct_lambda,
    recover_integers,
    verify_functional_relations,
    winding_number,
)


def _zero_set(model, which="ground"):
    record = select_states(diagonalize(model), which)
    evaluator = LambdaEvaluator(model, record.state)
    return record, evaluator, find_zeros(evaluator)


def test_domain_axes(real_params, imag_params):
    real = FundamentalDomain.for_params(real_params)
    assert real.axis is EtaAxis.REAL
    assert real.periods == pytest.approx((0.6, 1.0))
    assert real.to_native(real.from_native(0.2 + 0.1j)) == pytest.approx(0.2 + 0.1j)
    imag = FundamentalDomain.for_params(imag_params)
    assert imag.periods == pytest.approx((1.0, 1.6))


def test_canonicalize_reduces_into_domain(real_params):
    domain = FundamentalDomain.for_params(real_params)
    w = domain.canonicalize(0.8 + 1.3j)
    assert -0.3 < w.real <= 0.3
    assert -0.5 < w.imag <= 0.5
    assert domain.torus_distance(w, 0.8 + 1.3j) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("which", ["ground", "first"])
@pytest.mark.parametrize("n_sites", [4, 5])
@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_energy_from_zeros_matches_diagonalization(params, twist, n_sites, which):
    model = SpinChainModel(n_sites, params, twist)
    record, _, zset = _zero_set(model, which)
    assert zset.n_zeros == n_sites
    assert zset.residual_max < 1e-8
    assert energy_from_zeros(zset, model) == pytest.approx(record.energy, abs=1e-8)


def test_zero_set_is_labelled(chain4):
    _, _, zset = _zero_set(chain4)
    assert isinstance(zset.m1, int)
    assert isinstance(zset.m2, int)
    assert len(zset.labels) == 4
    assert zset.bulk_count + len(zset.discrete) == 4
    assert "expectations" in zset.checks
    assert zset.winding == pytest.approx(4.0, abs=1e-6)


def test_reconstructed_lambda(chain4):
    _, evaluator, zset = _zero_set(chain4)
    prefactor = lambda0(evaluator, zset)
    probes = np.array([0.17 + 0.04j, -0.22 + 0.09j])
    rebuilt = reconstruct_lambda(probes, zset, chain4, prefactor)
    np.testing.assert_allclose(rebuilt, evaluator.values(probes), rtol=1e-7)


@pytest.mark.parametrize("twist", list(BoundaryTwist))
def test_functional_relations_inhomogeneous(twist):
    params = EllipticParams(0.6j, 0.7)
    model = SpinChainModel(3, params, twist, (0.021j, -0.034j, 0.013j))
    for evaluator in transfer_eigenstates(model):
        report = verify_functional_relations(evaluator)
        assert not report["fusion_skipped"]
        for key in ("fusion_at_theta", "product_at_theta", "quasi_period_one", "quasi_period_tau"):
            assert report[key] < 1e-7, key


@pytest.mark.slow
def test_zeros_of_a_longer_chain(imag_params):
    model = SpinChainModel(10, imag_params)
    record, _, zset = _zero_set(model)
    assert zset.n_zeros == 10
    assert energy_from_zeros(zset, model) == pytest.approx(record.energy, abs=1e-8 * max(1.0, abs(record.energy)))




def _synthetic(params, zeros):
    return ZeroSet(
        zeros=tuple(complex(w) for w in zeros),
        residuals=(0.0,) * len(zeros),
        domain=FundamentalDomain.for_params(params),
    )


def test_classify_exact_bulk_strings(small_real_params):
    zset = _synthetic(small_real_params, [0.1 + 0.3j, 0.1 - 0.3j])
    report = classify(zset, SpinChainModel(2, small_real_params))
    assert report.tags == ("conjugate_pair(1,1)",) * 2
    assert report.bulk_count == 2
    assert report.discrete == ()
    assert report.max_deviation < 1e-12


def test_classify_prefers_nearest_template():
    """At eta = 0.28 the (1,1) and (1,-1) lines are 0.06 apart; both are within tolerance here."""
    params = EllipticParams(0.6j, 0.28)
    zset = _synthetic(params, [0.1 + 0.235j, 0.1 - 0.235j])
    report = classify(zset, SpinChainModel(2, params))
    assert report.tags == ("conjugate_pair(1,-1)",) * 2
    assert [(s.n, s.nu) for s in report.strings] == [(1, -1), (1, -1)]
    assert report.max_deviation == pytest.approx(0.015, abs=1e-9)
    assert report.bulk_count == 0


def test_classify_two_strings(small_real_params):
    zset = _synthetic(small_real_params, [0.1 + 0.44j, 0.1 - 0.44j])
    report = classify(zset, SpinChainModel(2, small_real_params))
    assert report.tags == ("conjugate_pair(2,1)",) * 2
    assert report.max_deviation == pytest.approx(0.01, abs=1e-9)


def test_classify_off_template_zero_is_anomalous(small_real_params):
    zset = _synthetic(small_real_params, [0.1 + 0.125j, 0.1 - 0.125j])
    report = classify(zset, SpinChainModel(2, small_real_params))
    assert report.tags == (ANOMALOUS, ANOMALOUS)
    assert report.discrete == zset.zeros
    assert report.max_deviation == pytest.approx(0.075, abs=1e-9)
    assert report.strings == ()


def test_classify_coinciding_templates(small_imag_params):
    """At eta = tau/4 the (1,1) and (1,-1) lines coincide; the bulk label wins."""
    zset = _synthetic(small_imag_params, [0.2 + 0.4j, 0.2 - 0.4j])
    report = classify(zset, SpinChainModel(2, small_imag_params))
    assert report.tags == ("conjugate_pair(1,1)",) * 2
    assert report.bulk_count == 2


def test_classify_axes(real_params):
    zset = _synthetic(real_params, [0.1, 0.29, 0.05 + 0.5j])
    report = classify(zset, SpinChainModel(3, real_params))
    assert report.tags == ("real_axis", "boundary_discrete", "half_line")
    assert report.bulk_count == 1
    assert report.census == {"in_band": 2, "real": 2, "pairs": 0}


@pytest.mark.parametrize(
    ("discrete", "sides", "holds"),
    [
        ([0.3], (1, 1, 1), True),
        ([0.1 + 0.2j, 0.1 - 0.2j], (2, 2, 2), True),
        ([0.1 + 0.4j], (1, -1, -1), False),
        ([], (0, 0, 0), True),
    ],
)
def test_balance_checks(real_params, discrete, sides, holds):
    report = balance_checks(discrete, real_params, BoundaryTwist.PERIODIC)
    assert report == {"sides": sides, "holds": holds}


def test_winding_number_counts_enclosed_zeros():
    roots = (0.1, -0.2j, 0.3 + 0.1j)

    def func(z):
        z = np.asarray(z)
        return (z - roots[0]) * (z - roots[1]) * (z - roots[2])

    assert winding_number(func, -0.5 - 0.5j, (1.0, 1.0), samples=64) == pytest.approx(3.0, abs=1e-9)
    assert winding_number(func, 0.4 + 0.4j, (0.5, 0.5), samples=64) == pytest.approx(0.0, abs=1e-9)


def test_zeros_close_under_conjugation(real_params):
    _, _, zset = _zero_set(SpinChainModel(4, real_params, BoundaryTwist.Y))
    assert partner_defect(zset) < 1e-6
    assert partner_defect(_synthetic(real_params, [0.1 + 0.2j])) == pytest.approx(0.4)


def test_sum_rule_integers(small_imag_params):
    model = SpinChainModel(4, small_imag_params)
    _, _, zset = _zero_set(model)
    assert recover_integers(zset, model) == (zset.m1, zset.m2)
    assert zset.m1 == 0
    assert zset.checks["expectations"]["holds"]

    shifted = replace(zset, zeros=(zset.zeros[0] + 0.01, *zset.zeros[1:]))
    with pytest.raises(IntegerRecoveryError):
        recover_integers(shifted, model)


CENSUS_POINTS = {
    "real_large": (0.6j, 0.7),
    "real_small": (0.6j, 0.3),
    "imag_large": (1.6j, 1.0j),
    "imag_small": (1.6j, 0.4j),
}


def _expected_census(regime: Regime, twist: BoundaryTwist, parity: Parity, which: str) -> dict[str, int]:
    none = {"in_band": 0, "real": 0, "pairs": 0}
    one_real = {"in_band": 1, "real": 1, "pairs": 0}
    finite = gap_is_finite(regime, twist, parity)
    if which == "ground":
        return none if finite else one_real
    if not finite:
        return one_real
    if regime.is_large:
        return {"in_band": 2, "real": 0, "pairs": 1}
    return {"in_band": 2, "real": 2, "pairs": 0}


@pytest.mark.slow
@pytest.mark.parametrize("n_sites", [10, 11])
@pytest.mark.parametrize("twist", list(BoundaryTwist))
@pytest.mark.parametrize("point", list(CENSUS_POINTS))
def test_discrete_zero_census(point, twist, n_sites):
    """In-band discrete zeros of the ground and first excited states in every twist/parity cell."""
    params = EllipticParams(*CENSUS_POINTS[point])
    model = SpinChainModel(n_sites, params, twist)
    records = diagonalize(model)
    for which in ("ground", "first"):
        record = select_states(records, which)
        zset = find_zeros(LambdaEvaluator(model, record.state))
        expected = _expected_census(params.regime, twist, Parity.of(n_sites), which)
        assert zset.checks["census"] == expected, which
