import json
import math
import os
import sys
import argparse

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import ExperimentConfig, analyze_fringe, fringe_scan

DAVID_PHASES = {"phi_d_0": 0.0, "phi_d_pi2": math.pi / 2}


def _fringe_entry(result) -> dict:
    analytic = analyze_fringe(result, sampled=False)
    sampled = analyze_fringe(result, sampled=True)
    return {
        "phi_c": result.settings().tolist(),
        "coincidences": [p.record.coincidences for p in result.points],
        "accidentals": [p.record.accidentals_estimate for p in result.points],
        "singles_c": [p.record.singles_c for p in result.points],
        "raw_visibility": sampled.raw.visibility,
        "raw_stderr": sampled.raw.visibility_stderr,
        "subtracted_visibility": sampled.subtracted.visibility,
        "subtracted_stderr": sampled.subtracted.visibility_stderr,
        "singles_flatness_sigma": sampled.singles_flatness,
        "raw_witness": sampled.raw_witness,
        "analytic_raw_visibility": analytic.raw.visibility,
        "analytic_subtracted_visibility": analytic.subtracted.visibility,
        "analytic_singles_flatness": analytic.singles_flatness,
    }


def run_trial(pulses: int = 1_000_000, seed: int = 20250601, points: int = 12,
              workers: int = 1, ideal: bool = False):
    settings = ConfigurationFactory.ideal(seed) if ideal else ConfigurationFactory.laboratory_conditions(seed)
    config = ExperimentConfig.from_settings(settings, pulses=pulses, workers=workers)
    phases = [2.0 * math.pi * k / points for k in range(points)]

    data = {"pulses": pulses, "seed": seed, "ideal": ideal}
    for key, phi_d in DAVID_PHASES.items():
        print(f"Fringe scan at phi_D = {phi_d:.4f} over {points} phases")
        data[key] = _fringe_entry(fringe_scan(phases, phi_d, config, sampled=True))
        print(f"  raw V = {data[key]['raw_visibility']:.3f} ± {data[key]['raw_stderr']:.3f}")

    result_path = os.path.join(os.path.dirname(__file__), "fringes_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Two-photon fringes versus Charlie's phase")
    parser.add_argument("--pulses", type=int, default=1_000_000, help="Start pulses per phase")
    parser.add_argument("--seed", type=int, default=20250601, help="Master random seed")
    parser.add_argument("--points", type=int, default=12, help="Phases over one period")
    parser.add_argument("--workers", type=int, default=1, help="Parallel sampling workers")
    parser.add_argument("--ideal", action="store_true", help="Single pair, perfect components")
    args = parser.parse_args()
    run_trial(args.pulses, args.seed, args.points, args.workers, args.ideal)
