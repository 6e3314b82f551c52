#!/usr/bin/env python3
"""Tests for the three-switch CZ gate and the entangler routing table."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin.config import CompensationStyle, GateContractViolation, NotSinglePhotonInput
from timebin.fock_core import ModeLabel, PureState
from timebin.gates import (
    CZ_SUCCESS, CZ_TARGET, PARTIAL_PBS_THETA, cz_gate, cz_gate_report, encode_qubit,
    entangler_as_pbs_check, output_amplitudes, partial_pbs_schedule, process_fidelity,
)


@pytest.mark.parametrize("compensation", list(CompensationStyle))
def test_cz_operator_is_diag_over_three(compensation):
    report = cz_gate_report(compensation)
    assert np.max(np.abs(report.operator - CZ_TARGET / 3.0)) < 1e-10
    assert report.success_probabilities == pytest.approx([CZ_SUCCESS] * 4, abs=1e-10)
    assert report.fidelity == pytest.approx(1.0, abs=1e-12)
    assert report.plus_plus_concurrence == pytest.approx(1.0, abs=1e-9)
    assert report.swap_asymmetry < 1e-12
    assert report.linearity_residual < 1e-12
    report.check_contract()


def test_partial_pbs_couples_t1_with_one_third_power():
    assert math.cos(PARTIAL_PBS_THETA / 2) ** 2 == pytest.approx(1.0 / 3.0)
    assert partial_pbs_schedule().theta_for(2) == 0.0


def test_finite_extinction_breaks_the_contract():
    report = cz_gate_report(CompensationStyle.SWITCH, extinction_db=20.0)
    assert report.fidelity < 1.0
    with pytest.raises(GateContractViolation):
        report.check_contract(tolerance=1e-12)
    assert report.to_dict()["extinction_db"] == 20.0


def test_cz_gate_flips_the_sign_of_t1_t1():
    selected, report = cz_gate([0.0, 1.0], [0.0, 1.0], report=False)
    assert report is None
    amplitudes = output_amplitudes(selected)
    assert amplitudes[3] == pytest.approx(-1.0 / 3.0)
    assert np.abs(amplitudes[:3]).max() < 1e-12


def test_cz_gate_on_superpositions():
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    selected, report = cz_gate(plus, plus)
    assert selected.norm_squared == pytest.approx(CZ_SUCCESS)
    assert output_amplitudes(selected) == pytest.approx(np.array([1, 1, 1, -1]) / 6.0)
    assert report.fidelity == pytest.approx(1.0, abs=1e-12)


def test_encode_qubit_validates_inputs():
    with pytest.raises(NotSinglePhotonInput):
        encode_qubit([0.0, 0.0], "A")
    with pytest.raises(NotSinglePhotonInput):
        encode_qubit([1.0, 0.0, 0.0], "A")
    with pytest.raises(NotSinglePhotonInput):
        encode_qubit(PureState.basis({ModeLabel("A", 1): 2}), "A")
    state = encode_qubit([3.0, 4.0], "A")
    assert state.amplitude({ModeLabel("A", 2): 1}) == pytest.approx(0.6)
    assert state.amplitude({ModeLabel("A", 1): 1}) == pytest.approx(0.8)


def test_process_fidelity_ignores_scale():
    assert process_fidelity(CZ_TARGET / 3.0) == pytest.approx(1.0)
    assert process_fidelity(np.eye(4)) == pytest.approx(0.25)
    assert process_fidelity(np.zeros((4, 4))) == 0.0


def test_entangler_routes_every_basis_photon():
    assert entangler_as_pbs_check()
