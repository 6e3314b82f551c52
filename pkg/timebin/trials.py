"""Utilities to run the time-bin validation trials.

Each trial in the top-level `trials` directory is a standalone script that
prints its results as JSON; this module runs them and collects the output.
"""

import os
import sys
import subprocess
import json
import logging
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))

TRIAL_SCRIPTS = {
    "entangler_state": "trials/001_entangler_state/run_trial.py",
    "hom_dip": "trials/002_hom_dip/run_trial.py",
    "fringes": "trials/003_two_photon_fringes/run_trial.py",
    "delay_scan": "trials/004_delay_scan/run_trial.py",
    "cz_gate": "trials/005_cz_gate/run_trial.py",
    "mu_sweep": "trials/006_mu_sweep/run_trial.py",
    "extinction": "trials/007_extinction_sensitivity/run_trial.py",
}


def _run_script(rel_path: str) -> Dict:
    """Execute a trial script and return its JSON output."""
    path = os.path.join(ROOT_DIR, rel_path)
    proc = subprocess.run([sys.executable, path], capture_output=True, text=True)
    if proc.returncode != 0:
        logger.warning("%s exited with %d: %s", rel_path, proc.returncode, proc.stderr.strip()[-500:])
    output = proc.stdout.strip()
    # progress lines come first; the JSON document starts at the first '{' line
    start = next((i for i, line in enumerate(output.splitlines()) if line.startswith("{")), None)
    if start is None:
        return {}
    try:
        return json.loads("\n".join(output.splitlines()[start:]))
    except json.JSONDecodeError:
        return {}


def run_all(names: Optional[List[str]] = None) -> Dict[str, Dict]:
    """Run the named trials (default: all) and return their results."""
    selected = names or list(TRIAL_SCRIPTS)
    unknown = [n for n in selected if n not in TRIAL_SCRIPTS]
    if unknown:
        raise KeyError(f"unknown trial(s): {', '.join(unknown)}")
    return {name: _run_script(TRIAL_SCRIPTS[name]) for name in selected}


if __name__ == "__main__":
    results = run_all()
    print(json.dumps(results, indent=2))
