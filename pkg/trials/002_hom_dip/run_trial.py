import json
import os
import sys
import argparse

import numpy as np

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import ExperimentConfig, hom_dip_visibility, hom_scan


def run_trial(pulses: int = 1_000_000, seed: int = 20250601, span_ps: float = 300.0,
              step_ps: float = 20.0, workers: int = 1, ideal: bool = False):
    settings = ConfigurationFactory.ideal(seed) if ideal else ConfigurationFactory.laboratory_conditions(seed)
    config = ExperimentConfig.from_settings(settings, pulses=pulses, workers=workers)
    delays = [float(d) for d in np.arange(-span_ps, span_ps + step_ps / 2, step_ps)]

    print(f"HOM scan over {len(delays)} delays, {pulses} pulses per point")
    result = hom_scan(delays, config, sampled=True)
    fwhm = settings.source.pulse_fwhm_ps
    analytic, _ = hom_dip_visibility(result, fwhm, sampled=False)
    sampled, stderr = hom_dip_visibility(result, fwhm, sampled=True)

    data = {
        "delays_ps": delays,
        "analytic_rates": result.analytic_rates().tolist(),
        "sampled_rates": result.rates().tolist(),
        "rate_errors": result.rate_errors().tolist(),
        "coincidences": [p.record.coincidences for p in result.points],
        "visibility_analytic": analytic,
        "visibility_sampled": sampled,
        "visibility_stderr": stderr,
        "pulses": pulses,
        "seed": seed,
        "ideal": ideal,
        "config_hash": result.metadata["config_hash"],
    }

    result_path = os.path.join(os.path.dirname(__file__), "hom_dip_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Hong-Ou-Mandel dip through the switch at theta = pi/2")
    parser.add_argument("--pulses", type=int, default=1_000_000, help="Start pulses per delay")
    parser.add_argument("--seed", type=int, default=20250601, help="Master random seed")
    parser.add_argument("--span", type=float, default=300.0, help="Scan half-width in ps")
    parser.add_argument("--step", type=float, default=20.0, help="Delay step in ps")
    parser.add_argument("--workers", type=int, default=1, help="Parallel sampling workers")
    parser.add_argument("--ideal", action="store_true", help="Single pair, perfect components")
    args = parser.parse_args()
    run_trial(args.pulses, args.seed, args.span, args.step, args.workers, args.ideal)
