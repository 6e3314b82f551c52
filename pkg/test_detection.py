#!/usr/bin/env python3
"""Tests for exact click probabilities, Monte-Carlo sampling, accidentals and fringe fits."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin.config import DegeneratePhases, InsufficientPoints, InvariantViolation, ZeroStarts
from timebin.fock_core import ModeLabel, OccupationVector, PureState
from timebin.detection import (
    CountRecord, DetectorConfig, LossBudget, click_probabilities, estimate_accidentals,
    fit_visibility, fringe_model, minmax_visibility, run_monte_carlo, split_pulses,
    subtract_accidentals,
)

C2, D2 = ModeLabel("C", 2), ModeLabel("D", 2)


def _detectors(efficiency=1.0, dark=0.0, gate=2):
    return (DetectorConfig("C", gate, efficiency, dark), DetectorConfig("D", gate, efficiency, dark))


def _pair_state(weight=1.0) -> PureState:
    return PureState({OccupationVector.from_mapping({C2: 1, D2: 1}): math.sqrt(weight)})


# =============================================================================
# EXACT CLICK PROBABILITIES
# =============================================================================

def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig("C", 2, efficiency=1.5)
    with pytest.raises(ValueError):
        DetectorConfig("C", 2, dark_prob_per_gate=1.0)
    with pytest.raises(ValueError):
        DetectorConfig("C", 0)


def test_perfect_detectors_see_every_photon():
    dist = click_probabilities(_pair_state(), _detectors())
    assert dist.coincidence == pytest.approx(1.0)
    assert dist.click_probability(0) == pytest.approx(1.0)


def test_efficiency_and_loss_budget_thin_photons():
    dist = click_probabilities(_pair_state(), _detectors(efficiency=0.5))
    assert dist.coincidence == pytest.approx(0.25)
    budget = LossBudget({"C": 0.5, "D": 0.5})
    same = click_probabilities(_pair_state(), _detectors(), budget)
    assert same.coincidence == pytest.approx(0.25)


def test_threshold_detector_saturates():
    state = PureState.basis({C2: 2})
    dist = click_probabilities(state, _detectors(efficiency=0.5))
    assert dist.click_probability(0) == pytest.approx(0.75)
    assert dist.click_probability(1) == pytest.approx(0.0)


def test_missing_norm_counts_as_vacuum():
    dist = click_probabilities(_pair_state(0.4), _detectors())
    assert dist.coincidence == pytest.approx(0.4)
    assert dist.probability((False, False)) == pytest.approx(0.6)
    assert sum(dist.patterns.values()) == pytest.approx(1.0)


def test_dark_counts_fire_on_vacuum():
    dist = click_probabilities(PureState.vacuum(), _detectors(dark=0.01))
    assert dist.coincidence == pytest.approx(1e-4)
    assert dist.click_probability(1) == pytest.approx(0.01)


def test_detectors_only_see_their_gate():
    state = PureState.basis({ModeLabel("C", 1): 1, ModeLabel("D", 1): 1})
    assert click_probabilities(state, _detectors(gate=2)).coincidence == 0.0
    assert click_probabilities(state, _detectors(gate=1)).coincidence == pytest.approx(1.0)


def test_detectors_need_distinct_ports():
    with pytest.raises(ValueError):
        click_probabilities(_pair_state(), (DetectorConfig("C", 2), DetectorConfig("C", 1)))


def test_loss_budget_reads_the_state_record():
    state = _pair_state().with_transmission("C", 0.25)
    assert LossBudget.from_state(state).transmission("C") == pytest.approx(0.25)
    assert LossBudget.from_state(state).transmission("D") == 1.0
    with pytest.raises(ValueError):
        LossBudget({"C": 0.0})


def _mixed_state() -> PureState:
    return PureState({
        OccupationVector(): math.sqrt(0.2),
        OccupationVector.from_mapping({C2: 1, D2: 1}): math.sqrt(0.5),
        OccupationVector.from_mapping({C2: 2}): math.sqrt(0.2),
        OccupationVector.from_mapping({C2: 1, D2: 2}): math.sqrt(0.1),
    }, n_max=4)


def test_marginals_grow_with_efficiency_and_transmission():
    state = _mixed_state()
    by_efficiency = [click_probabilities(state, _detectors(efficiency=eta, dark=1e-4))
                     for eta in (0.05, 0.2, 0.5, 0.8, 1.0)]
    by_budget = [click_probabilities(state, _detectors(efficiency=0.5), LossBudget({"C": t, "D": t}))
                 for t in (0.05, 0.2, 0.5, 0.8, 1.0)]
    for series in (by_efficiency, by_budget):
        for index in (0, 1):
            marginals = [dist.click_probability(index) for dist in series]
            assert all(b >= a - 1e-15 for a, b in zip(marginals, marginals[1:]))
        coincidences = [dist.coincidence for dist in series]
        assert all(b >= a - 1e-15 for a, b in zip(coincidences, coincidences[1:]))


def test_small_efficiency_response_is_linear():
    state = _mixed_state()
    eta, transmission, dark = 1e-4, 0.5, 1e-6
    dist = click_probabilities(state, _detectors(efficiency=eta, dark=dark),
                               LossBudget({"C": transmission, "D": transmission}))
    # mean photon numbers: C 0.5 + 0.4 + 0.1, D 0.5 + 0.2
    assert dist.click_probability(0) == pytest.approx(eta * transmission * 1.0 + dark, rel=1e-3)
    assert dist.click_probability(1) == pytest.approx(eta * transmission * 0.7 + dark, rel=1e-3)


# =============================================================================
# MONTE-CARLO SAMPLING
# =============================================================================

def test_sampling_is_reproducible():
    state, detectors = _pair_state(0.3), _detectors(efficiency=0.5, dark=1e-3)
    first = run_monte_carlo(state, detectors, LossBudget.unit(), 50_000, seed=123)
    second = run_monte_carlo(state, detectors, LossBudget.unit(), 50_000, seed=123)
    assert first == second
    other = run_monte_carlo(state, detectors, LossBudget.unit(), 50_000, seed=124)
    assert other != first


def test_sampling_agrees_with_exact_probabilities():
    state, detectors = _pair_state(0.3), _detectors(efficiency=0.5, dark=1e-3)
    pulses = 400_000
    exact = click_probabilities(state, detectors, LossBudget.unit())
    record = run_monte_carlo(state, detectors, LossBudget.unit(), pulses, seed=(20250601, 0))
    for observed, p in [(record.coincidences, exact.coincidence),
                        (record.singles_c, exact.click_probability(0)),
                        (record.singles_d, exact.click_probability(1))]:
        sigma = math.sqrt(pulses * p * (1 - p))
        assert abs(observed - pulses * p) < 4 * sigma


def test_parallel_workers_are_reproducible():
    state, detectors = _pair_state(0.3), _detectors(efficiency=0.5)
    first = run_monte_carlo(state, detectors, LossBudget.unit(), 20_001, seed=9, workers=2)
    second = run_monte_carlo(state, detectors, LossBudget.unit(), 20_001, seed=9, workers=2)
    assert first == second
    assert first.starts == 20_001


def test_split_pulses_covers_every_pulse():
    assert split_pulses(10, 3) == [4, 3, 3]
    assert sum(split_pulses(1_000_001, 4)) == 1_000_001


def test_sampling_needs_two_detectors_and_pulses():
    with pytest.raises(ValueError):
        run_monte_carlo(_pair_state(), _detectors()[:1], LossBudget.unit(), 10, seed=1)
    with pytest.raises(ValueError):
        run_monte_carlo(_pair_state(), _detectors(), LossBudget.unit(), 0, seed=1)


# =============================================================================
# COUNT RECORDS AND ACCIDENTALS
# =============================================================================

def test_count_record_invariants():
    with pytest.raises(InvariantViolation):
        CountRecord(starts=100, singles_c=5, singles_d=3, coincidences=4)
    with pytest.raises(InvariantViolation):
        CountRecord(starts=10, singles_c=11, singles_d=3, coincidences=1)
    record = CountRecord(starts=1000, singles_c=100, singles_d=100, coincidences=10)
    assert record.rate == pytest.approx(0.01)
    assert record.rate_stderr == pytest.approx(math.sqrt(0.01 * 0.99 / 1000))


def test_accidental_estimate_and_subtraction():
    record = CountRecord(starts=1_000_000, singles_c=1000, singles_d=2000, coincidences=5)
    assert estimate_accidentals(record) == pytest.approx(2.0)
    assert subtract_accidentals(record) == pytest.approx(3.0)
    quiet = CountRecord(starts=1_000_000, singles_c=1000, singles_d=2000, coincidences=1)
    assert subtract_accidentals(quiet) == 0.0
    with pytest.raises(ZeroStarts):
        estimate_accidentals(CountRecord(0, 0, 0, 0))


# =============================================================================
# FRINGE FITTING
# =============================================================================

PHASES = np.linspace(0.0, 2.0 * math.pi, 12, endpoint=False)


def test_fit_recovers_an_exact_fringe():
    counts = fringe_model(PHASES, 200.0, 0.8, 0.5)
    fit = fit_visibility(list(zip(PHASES, counts)))
    assert fit.visibility == pytest.approx(0.8, abs=1e-6)
    assert fit.amplitude == pytest.approx(200.0, rel=1e-6)
    assert fit.phase_offset == pytest.approx(0.5, abs=1e-6)
    assert fit.residual < 1e-6
    assert fit.curve([0.5])[0] == pytest.approx(200.0 * 0.2, rel=1e-6)
    assert abs(fit.minmax_visibility - fit.visibility) < 0.05


def test_fit_of_a_floored_fringe_stays_physical():
    # accidental subtraction clips the dark side of the fringe at zero
    counts = np.maximum(0.0, fringe_model(PHASES, 100.0, 1.2, 0.0))
    fit = fit_visibility(list(zip(PHASES, counts)))
    assert 0.9 < fit.visibility <= 1.0
    assert math.cos(fit.phase_offset) == pytest.approx(1.0, abs=1e-3)


def test_fit_reports_a_positive_visibility_for_inverted_fringes():
    counts = fringe_model(PHASES, 100.0, 0.6, math.pi)
    fit = fit_visibility(list(zip(PHASES, counts)))
    assert fit.visibility == pytest.approx(0.6, abs=1e-6)
    assert math.cos(fit.phase_offset) == pytest.approx(-1.0, abs=1e-6)
    assert -math.pi <= fit.phase_offset <= math.pi


def test_fit_of_a_flat_trace_has_zero_visibility():
    fit = fit_visibility([(p, 50.0) for p in PHASES])
    assert fit.visibility == pytest.approx(0.0, abs=1e-9)


def test_noisy_fit_error_covers_the_truth():
    rng = np.random.default_rng(5)
    counts = rng.poisson(fringe_model(PHASES, 400.0, 0.7, 0.0))
    fit = fit_visibility(list(zip(PHASES, counts)))
    assert fit.visibility_stderr > 0.0
    assert abs(fit.visibility - 0.7) < 5 * fit.visibility_stderr


def test_fit_rejects_bad_inputs():
    with pytest.raises(InsufficientPoints):
        fit_visibility([(0.0, 1.0), (1.0, 2.0), (2.0, 1.0), (3.0, 2.0)])
    with pytest.raises(DegeneratePhases):
        fit_visibility([(p, 1.0 + math.cos(p)) for p in np.linspace(0.0, math.pi, 8)])
    with pytest.raises(InsufficientPoints):
        fit_visibility([(p, 0.0) for p in PHASES])


def test_minmax_visibility():
    assert minmax_visibility([10, 30, 20]) == pytest.approx(0.5)
    assert minmax_visibility([0, 0]) == 0.0
