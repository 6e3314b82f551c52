#!/usr/bin/env python3
"""Tests for trial-result metrics and the trial runner."""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin import analysis, trials


def test_metrics_from_partial_results():
    results = {
        "entangler_state": {"fidelities": [1.0, 0.9999999], "success_probability": 0.5},
        "hom_dip": {"visibility_sampled": 0.66},
        "fringes": {"phi_d_pi2": {"raw_visibility": 0.9, "subtracted_visibility": 0.95}},
        "delay_scan": {"pi": {"ratio": 1.9}, "2pi": {"ratio": 0.1}},
        "mu_sweep": {"visibilities": [0.8, 0.7, 0.7, 0.5]},
        "extinction": {"raw_visibility": [0.5, 0.55, 0.6]},
    }
    metrics = analysis.compute_metrics(results)
    assert metrics["entangler_min_fidelity"] == 0.9999999
    assert metrics["hom_dip_visibility_in_band"] is True
    assert metrics["fringe_raw_visibility_pi2_in_band"] is False
    assert "fringe_raw_visibility_0" not in metrics
    assert metrics["delay_ratio_pi"] == 1.9
    assert metrics["mu_sweep_monotone"] is True
    assert metrics["extinction_visibility_span"] == pytest.approx(0.1)
    assert "cz_fidelity" not in metrics


def test_metrics_of_no_results_are_empty():
    assert analysis.compute_metrics({}) == {}


def test_cz_metrics():
    cz = {"switch": {"fidelity": 1.0, "success_probabilities": [1 / 9, 1 / 9, 1 / 9, 0.1]}}
    metrics = analysis.compute_metrics({"cz_gate": cz})
    assert metrics["cz_fidelity"] == 1.0
    assert metrics["cz_min_success"] == 0.1


def test_every_trial_has_a_script_and_a_result_file():
    assert set(trials.TRIAL_SCRIPTS) == set(analysis.RESULT_FILES)
    for rel_path in trials.TRIAL_SCRIPTS.values():
        assert os.path.exists(os.path.join(trials.ROOT_DIR, rel_path))


def test_unknown_trials_are_rejected():
    with pytest.raises(KeyError):
        trials.run_all(["hom_dip", "warp_drive"])
