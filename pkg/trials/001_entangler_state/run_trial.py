import json
import math
import os
import sys
import argparse
from dataclasses import replace

import numpy as np

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import (
    ExperimentConfig, concurrence, entangled_target, run_entangler, schmidt_coefficients,
    two_qubit_density_matrix,
)
from timebin.fock_core import fidelity
from timebin.gates import entangler_as_pbs_check


def run_trial(pairs: int = 20, seed: int = 20250601):
    rng = np.random.default_rng(seed)
    ideal = ExperimentConfig.from_settings(ConfigurationFactory.ideal(seed))

    phase_pairs, fidelities, successes = [], [], []
    for k in range(pairs):
        phi_a, phi_b = (float(x) for x in rng.uniform(0.0, 2.0 * math.pi, 2))
        state, success = run_entangler(replace(ideal, phases=(phi_a, phi_b, 0.0, 0.0)))
        phase_pairs.append([phi_a, phi_b])
        fidelities.append(fidelity(state, entangled_target(phi_a, phi_b)))
        successes.append(success)
        print(f"Pair {k + 1}/{pairs}: F = {fidelities[-1]:.12f}, P = {success:.12f}")

    state, success = run_entangler(ideal)
    noisy_state, noisy_success = run_entangler(
        ExperimentConfig.from_settings(ConfigurationFactory.laboratory_conditions(seed))
    )

    data = {
        "phase_pairs": phase_pairs,
        "fidelities": fidelities,
        "success_probabilities": successes,
        "success_probability": success,
        "schmidt_coefficients": schmidt_coefficients(state).tolist(),
        "concurrence": concurrence(two_qubit_density_matrix(state)),
        "routes_like_pbs": entangler_as_pbs_check(),
        "noisy_success_probability": noisy_success,
        "noisy_two_photon_concurrence": concurrence(two_qubit_density_matrix(noisy_state)),
    }

    result_path = os.path.join(os.path.dirname(__file__), "entangler_state_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Entangler output state versus the ideal Bell state")
    parser.add_argument("--pairs", type=int, default=20, help="Random (phi_A, phi_B) pairs to test")
    parser.add_argument("--seed", type=int, default=20250601, help="Seed for the phase draws")
    args = parser.parse_args()
    run_trial(pairs=args.pairs, seed=args.seed)
