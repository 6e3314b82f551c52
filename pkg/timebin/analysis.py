"""Summary metrics over the time-bin validation trial results."""

import os
import json
from typing import Dict, Any

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))

RESULT_FILES = {
    "entangler_state": os.path.join(ROOT_DIR, "trials", "001_entangler_state", "entangler_state_results.json"),
    "hom_dip": os.path.join(ROOT_DIR, "trials", "002_hom_dip", "hom_dip_results.json"),
    "fringes": os.path.join(ROOT_DIR, "trials", "003_two_photon_fringes", "fringes_results.json"),
    "delay_scan": os.path.join(ROOT_DIR, "trials", "004_delay_scan", "delay_scan_results.json"),
    "cz_gate": os.path.join(ROOT_DIR, "trials", "005_cz_gate", "cz_gate_results.json"),
    "mu_sweep": os.path.join(ROOT_DIR, "trials", "006_mu_sweep", "mu_sweep_results.json"),
    "extinction": os.path.join(
        ROOT_DIR, "trials", "007_extinction_sensitivity", "extinction_sensitivity_results.json"
    ),
}

# Laboratory values the simulated figures are compared against (+-2 sigma bands).
REFERENCE_BANDS = {
    "hom_dip_visibility": (0.53, 0.80),
    "fringe_raw_visibility_0": (0.27, 0.78),
    "fringe_raw_visibility_pi2": (0.35, 0.67),
}


def load_results() -> Dict[str, Any]:
    """Load every available trial result file; missing trials give {}."""
    data = {}
    for name, path in RESULT_FILES.items():
        if os.path.exists(path):
            with open(path) as f:
                data[name] = json.load(f)
        else:
            data[name] = {}
    return data


def compute_metrics(results: Dict[str, Any]) -> Dict[str, Any]:
    """Headline numbers of each trial that has been run."""
    metrics: Dict[str, Any] = {}

    entangler = results.get("entangler_state", {})
    if "fidelities" in entangler:
        metrics["entangler_min_fidelity"] = min(entangler["fidelities"])
        metrics["entangler_success_probability"] = entangler.get("success_probability")

    hom = results.get("hom_dip", {})
    if "visibility_sampled" in hom:
        metrics["hom_dip_visibility"] = hom["visibility_sampled"]

    fringes = results.get("fringes", {})
    for key, label in (("phi_d_0", "0"), ("phi_d_pi2", "pi2")):
        if key in fringes:
            metrics[f"fringe_raw_visibility_{label}"] = fringes[key]["raw_visibility"]
            metrics[f"fringe_subtracted_visibility_{label}"] = fringes[key]["subtracted_visibility"]

    delay = results.get("delay_scan", {})
    for trace in ("pi", "2pi"):
        if trace in delay:
            metrics[f"delay_ratio_{trace}"] = delay[trace]["ratio"]

    cz = results.get("cz_gate", {})
    if "switch" in cz:
        metrics["cz_fidelity"] = cz["switch"]["fidelity"]
        metrics["cz_min_success"] = min(cz["switch"]["success_probabilities"])

    sweep = results.get("mu_sweep", {})
    if sweep.get("visibilities"):
        vis = sweep["visibilities"]
        metrics["mu_sweep_monotone"] = all(a >= b for a, b in zip(vis, vis[1:]))

    extinction = results.get("extinction", {})
    if extinction.get("raw_visibility"):
        metrics["extinction_visibility_span"] = max(extinction["raw_visibility"]) - min(extinction["raw_visibility"])

    for name, (low, high) in REFERENCE_BANDS.items():
        if name in metrics:
            metrics[f"{name}_in_band"] = low <= metrics[name] <= high
    return metrics


def summarize() -> Dict[str, Any]:
    results = load_results()
    metrics = compute_metrics(results)
    summary = {"metrics": metrics, "results": results}
    print(json.dumps(summary, indent=2))
    return summary


if __name__ == "__main__":
    summarize()
