import json
import os
import sys
import argparse

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, ROOT_DIR)

from timebin.config import CompensationStyle
from timebin.gates import cz_gate_report


def run_trial(extinction_db: float = 20.0):
    data = {}
    for compensation in CompensationStyle:
        report = cz_gate_report(compensation)
        report.check_contract()
        data[compensation.value] = report.to_dict()
        print(f"{compensation.value}: fidelity {report.fidelity:.12f}, "
              f"concurrence {report.plus_plus_concurrence:.9f}")

    finite = cz_gate_report(CompensationStyle.SWITCH, extinction_db)
    data["finite_extinction"] = finite.to_dict()
    print(f"switch at {extinction_db} dB: fidelity {finite.fidelity:.6f}")

    result_path = os.path.join(os.path.dirname(__file__), "cz_gate_results.json")
    with open(result_path, "w") as f:
        json.dump(data, f, indent=2)

    print(json.dumps(data, indent=2))
    return data


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Post-selected CZ gate from three switches")
    parser.add_argument("--extinction-db", type=float, default=20.0,
                        help="Finite extinction for the sensitivity run")
    args = parser.parse_args()
    run_trial(args.extinction_db)
