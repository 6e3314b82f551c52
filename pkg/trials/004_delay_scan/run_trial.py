import json
import math
import os
import sys
import argparse

import numpy as np

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import ExperimentConfig, delay_contrast, delay_scan

TRACES = {"pi": math.pi, "2pi": 2.0 * math.pi}


def run_trial(pulses: int = 1_000_000, seed: int = 20250601, span_ps: float = 300.0,
              step_ps: float = 30.0, workers: int = 1, ideal: bool = False):
    settings = ConfigurationFactory.ideal(seed) if ideal else ConfigurationFactory.laboratory_conditions(seed)
    config = ExperimentConfig.from_settings(settings, pulses=pulses, workers=workers)
    delays = [float(d) for d in np.arange(-span_ps, span_ps + step_ps / 2, step_ps)]
    fwhm = settings.source.pulse_fwhm_ps

    data = {"delays_ps": delays, "pulses": pulses, "seed": seed, "ideal": ideal}
    for label, phase in TRACES.items():
        print(f"Delay scan with phi_C = {label} over {len(delays)} delays")
        result = delay_scan(delays, phase, config, sampled=True)
        ratio, stderr = delay_contrast(result, fwhm, sampled=True)
        analytic, _ = delay_contrast(result, fwhm, sampled=False)
        data[label] = {
            "sampled_rates": result.rates().tolist(),
            "rate_errors": result.rate_errors().tolist(),
            "analytic_rates": result.analytic_rates().tolist(),
            "ratio": ratio,
            "ratio_stderr": stderr,
            "analytic_ratio": analytic,
        }
        print(f"  zero-delay / plateau = {ratio:.3f} ± {stderr:.3f} (analytic {analytic:.3f})")

    result_path = os.path.join(os.path.dirname(__file__), "delay_scan_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Bunching and anti-bunching versus relative delay")
    parser.add_argument("--pulses", type=int, default=1_000_000, help="Start pulses per delay")
    parser.add_argument("--seed", type=int, default=20250601, help="Master random seed")
    parser.add_argument("--span", type=float, default=300.0, help="Scan half-width in ps")
    parser.add_argument("--step", type=float, default=30.0, help="Delay step in ps")
    parser.add_argument("--workers", type=int, default=1, help="Parallel sampling workers")
    parser.add_argument("--ideal", action="store_true", help="Single pair, perfect components")
    args = parser.parse_args()
    run_trial(args.pulses, args.seed, args.span, args.step, args.workers, args.ideal)
