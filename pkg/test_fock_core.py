#!/usr/bin/env python3
"""
Tests for the sparse Fock-state core: state invariants, the mode-pair
substitution against the dense and permanent oracles, and composition.
"""

import math
import os
import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin.config import (
    Branch, DimensionTooLarge, EmptyProjection, InvariantViolation, ModeCollision,
    NonUnitaryMatrix, TruncationOverflow,
)
from timebin.fock_core import (
    ModeLabel, OccupationVector, PureState, apply_linear_map, apply_mode_pair_isometry,
    apply_mode_pair_unitary, dense_oracle_apply, fidelity, permanent, permanent_amplitude,
    project, superpose, tensor,
)
from timebin.elements import switch_matrix

A1, B1 = ModeLabel("A", 1), ModeLabel("B", 1)
ALL_MODES = [ModeLabel(port, time_bin) for port in "ABCD" for time_bin in (1, 2)]


def _occ(**counts) -> OccupationVector:
    """_occ(A1=1, B2=2) -> occupation vector over parallel-branch modes"""
    return OccupationVector.from_mapping({ModeLabel(key[0], int(key[1:])): n for key, n in counts.items()})


def _random_state(rng, modes, max_photons=3) -> PureState:
    terms = {}
    for _ in range(rng.integers(1, 6)):
        total = int(rng.integers(0, max_photons + 1))
        picks = rng.choice(len(modes), size=total)
        counts = {}
        for k in picks:
            counts[modes[k]] = counts.get(modes[k], 0) + 1
        terms[OccupationVector.from_mapping(counts)] = complex(rng.normal(), rng.normal())
    norm = math.sqrt(sum(abs(a) ** 2 for a in terms.values()))
    return PureState({occ: a / norm for occ, a in terms.items()})


# =============================================================================
# STATE INVARIANTS
# =============================================================================

def test_occupation_vector_is_canonical():
    first = OccupationVector.from_mapping({B1: 1, A1: 2, ModeLabel("C", 2): 0})
    second = OccupationVector.from_mapping({A1: 2, B1: 1})
    assert first == second
    assert first.total == 3
    assert first.port_count("A") == 2
    assert first.modes() == (A1, B1)


def test_amplitudes_below_tolerance_are_pruned():
    state = PureState({_occ(A1=1): 1.0, _occ(B1=1): 1e-14})
    assert len(state) == 1
    assert state.norm_squared == pytest.approx(1.0)


def test_state_rejects_overfull_terms_and_excess_norm():
    with pytest.raises(TruncationOverflow):
        PureState({_occ(A1=5): 1.0}, n_max=4)
    with pytest.raises(InvariantViolation):
        PureState({_occ(A1=1): 1.0, _occ(B1=1): 0.5})


def test_filter_keeps_amplitudes_and_project_renormalizes():
    state = PureState({_occ(A1=1): math.sqrt(0.25), _occ(B1=1): math.sqrt(0.75)})
    kept = state.filter(lambda occ: occ.port_count("B") == 1)
    assert kept.norm_squared == pytest.approx(0.75)
    projected, probability = project(state, lambda occ: occ.port_count("B") == 1)
    assert probability == pytest.approx(0.75)
    assert projected.norm_squared == pytest.approx(1.0)
    with pytest.raises(EmptyProjection):
        state.filter(lambda occ: occ.port_count("C") > 0)


def test_projecting_twice_changes_nothing():
    state = PureState({_occ(A1=1, B1=1): 0.6, _occ(A1=2): 0.48j, _occ(B1=2): 0.64})
    predicate = lambda occ: occ.port_count("A") >= 1
    once, _ = project(state, predicate)
    twice, probability = project(once, predicate)
    assert probability == pytest.approx(1.0)
    assert set(twice) == set(once)
    for occ in once:
        assert twice.amplitude(occ) == pytest.approx(once.amplitude(occ))


def test_tensor_merges_and_detects_collisions():
    a = PureState.basis({A1: 1})
    b = PureState.basis({B1: 1}).with_transmission("B", 0.5)
    joint = tensor(a, b)
    assert joint.amplitude(_occ(A1=1, B1=1)) == pytest.approx(1.0)
    assert joint.port_transmission("B") == pytest.approx(0.5)
    with pytest.raises(ModeCollision):
        tensor(a, a)


def test_superpose_and_fidelity():
    a, b = PureState.basis({A1: 1}), PureState.basis({B1: 1})
    plus = superpose([(1 / math.sqrt(2), a), (1 / math.sqrt(2), b)])
    assert plus.norm_squared == pytest.approx(1.0)
    assert fidelity(plus, a) == pytest.approx(0.5)
    assert fidelity(plus, plus) == pytest.approx(1.0)


def test_photon_number_distribution():
    state = PureState({OccupationVector(): math.sqrt(0.5), _occ(A1=1, B1=1): math.sqrt(0.5)})
    assert state.photon_number_distribution() == pytest.approx({0: 0.5, 2: 0.5})
    assert state.photon_number_distribution(ports=["A"]) == pytest.approx({0: 0.5, 1: 0.5})
    assert state.photon_number_distribution(ports=["C"]) == pytest.approx({0: 1.0})


# =============================================================================
# MODE-PAIR SUBSTITUTION
# =============================================================================

def test_balanced_pair_map_suppresses_coincidences():
    out = apply_mode_pair_unitary(PureState.basis({A1: 1, B1: 1}), A1, B1, switch_matrix(math.pi / 2))
    assert abs(out.amplitude(_occ(A1=1, B1=1))) < 1e-12
    assert out.amplitude(_occ(A1=2)) == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude(_occ(B1=2)) == pytest.approx(-1 / math.sqrt(2))


def test_pair_map_follows_column_convention():
    theta = 0.7
    m = switch_matrix(theta)
    out = apply_mode_pair_unitary(PureState.basis({A1: 1}), A1, B1, m)
    assert out.amplitude(_occ(A1=1)) == pytest.approx(math.cos(theta / 2))
    assert out.amplitude(_occ(B1=1)) == pytest.approx(-math.sin(theta / 2))


def test_pair_map_validates_its_arguments():
    state = PureState.basis({A1: 1})
    with pytest.raises(ValueError):
        apply_mode_pair_unitary(state, A1, A1, np.eye(2))
    with pytest.raises(NonUnitaryMatrix):
        apply_mode_pair_unitary(state, A1, B1, np.array([[1.0, 0.0], [0.0, 0.5]]))
    shrunk = apply_mode_pair_isometry(state, A1, B1, np.array([[0.5, 0.0], [0.0, 1.0]]))
    assert shrunk.norm_squared == pytest.approx(0.25)


def test_sparse_map_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for case in range(200):
        n_modes = int(rng.integers(2, 7))
        modes = [ALL_MODES[k] for k in rng.choice(len(ALL_MODES), size=n_modes, replace=False)]
        state = _random_state(rng, modes)
        u, v = modes[0], modes[1]
        m = unitary_group.rvs(2, random_state=rng)
        sparse = apply_mode_pair_unitary(state, u, v, m)
        dense = dense_oracle_apply(state, u, v, m)
        assert sparse.max_abs_difference(dense) < 1e-10, f"case {case}"
        assert sparse.norm_squared == pytest.approx(state.norm_squared, abs=1e-10)


def test_pair_maps_compose():
    rng = np.random.default_rng(11)
    modes = ALL_MODES[:4]
    for _ in range(20):
        state = _random_state(rng, modes)
        first, second = unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng)
        stepwise = apply_mode_pair_unitary(apply_mode_pair_unitary(state, modes[0], modes[1], first),
                                           modes[0], modes[1], second)
        combined = apply_mode_pair_unitary(state, modes[0], modes[1], second @ first)
        assert stepwise.max_abs_difference(combined) < 1e-10


def test_linear_map_matches_permanent_oracle():
    rng = np.random.default_rng(3)
    modes = [ModeLabel("A", 1), ModeLabel("B", 1), ModeLabel("C", 1)]
    for input_counts in [(1, 1, 1), (2, 1, 0), (0, 0, 3)]:
        u = unitary_group.rvs(3, random_state=rng)
        state = PureState.basis(dict(zip(modes, input_counts)))
        out = apply_linear_map(state, modes, u, check_unitary=True)
        for occ in [(3, 0, 0), (1, 1, 1), (0, 2, 1), (1, 0, 2)]:
            expected = permanent_amplitude(u, input_counts, occ)
            assert out.amplitude(dict(zip(modes, occ))) == pytest.approx(expected, abs=1e-10)


def test_permanent_values():
    assert permanent(np.array([[1, 2], [3, 4]])) == pytest.approx(10.0)
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.zeros((0, 0))) == pytest.approx(1.0)


def test_branches_do_not_interfere():
    bob_orthogonal = ModeLabel("B", 1, Branch.ORTHOGONAL)
    state = PureState.basis({A1: 1, bob_orthogonal: 1})
    out = apply_mode_pair_unitary(state, A1, ModeLabel("B", 1), switch_matrix(math.pi / 2))
    # only the parallel pair mixes; the orthogonal photon is a spectator
    assert out.amplitude({A1: 1, bob_orthogonal: 1}) == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude({ModeLabel("B", 1): 1, bob_orthogonal: 1}) == pytest.approx(-1 / math.sqrt(2))


def test_dense_oracle_refuses_large_problems():
    with pytest.raises(DimensionTooLarge):
        dense_oracle_apply(PureState.basis({A1: 5}, n_max=5), A1, B1, np.eye(2))
