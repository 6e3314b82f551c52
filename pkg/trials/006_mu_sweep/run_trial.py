import json
import os
import sys
import argparse

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import ConfigurationFactory
from timebin.experiments import ExperimentConfig, mu_sweep

DEFAULT_MUS = [0.02, 0.05, 0.1, 0.15, 0.2, 0.25]


def run_trial(mus=None):
    mus = mus or DEFAULT_MUS
    config = ExperimentConfig.from_settings(ConfigurationFactory.laboratory_conditions())
    sweep = mu_sweep(mus, config)
    for mu, visibility in sweep:
        print(f"mu = {mu:.3f}: dip visibility {visibility:.4f}")

    data = {
        "mus": [mu for mu, _ in sweep],
        "visibilities": [v for _, v in sweep],
    }

    result_path = os.path.join(os.path.dirname(__file__), "mu_sweep_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="HOM dip visibility versus mean pair number")
    parser.add_argument("--mus", type=float, nargs="+", default=DEFAULT_MUS, help="Mean pairs per pulse")
    args = parser.parse_args()
    run_trial(args.mus)
