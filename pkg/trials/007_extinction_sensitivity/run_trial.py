import json
import math
import os
import sys
import argparse

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import ExperimentConfig, analyze_fringe, fringe_scan

DEFAULT_EXTINCTIONS = [10.0, 15.0, 20.0, 25.0, 30.0, math.inf]


def run_trial(extinctions=None, david_phase: float = math.pi / 2, points: int = 12):
    extinctions = extinctions or DEFAULT_EXTINCTIONS
    phases = [2.0 * math.pi * k / points for k in range(points)]
    raw, subtracted = [], []
    for extinction_db in extinctions:
        settings = ConfigurationFactory.laboratory_conditions().with_overrides("switch", extinction_db=extinction_db)
        config = ExperimentConfig.from_settings(settings)
        summary = analyze_fringe(fringe_scan(phases, david_phase, config, sampled=False))
        raw.append(summary.raw.visibility)
        subtracted.append(summary.subtracted.visibility)
        print(f"{extinction_db} dB: raw V = {raw[-1]:.4f}, subtracted V = {subtracted[-1]:.4f}")

    data = {
        "extinction_db": [e if math.isfinite(e) else "inf" for e in extinctions],
        "david_phase": david_phase,
        "raw_visibility": raw,
        "subtracted_visibility": subtracted,
    }

    result_path = os.path.join(os.path.dirname(__file__), "extinction_sensitivity_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Fringe visibility versus switch extinction ratio")
    parser.add_argument("--extinctions", type=float, nargs="+", default=DEFAULT_EXTINCTIONS,
                        help="Extinction ratios in dB ('inf' for a perfect switch)")
    parser.add_argument("--points", type=int, default=12, help="Phases over one period")
    args = parser.parse_args()
    run_trial(args.extinctions, points=args.points)
