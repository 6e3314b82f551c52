#!/usr/bin/env python3
"""Tests for the command-line harness: argument parsing, outputs, manifests and exit codes."""

import argparse
import json
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin import cli
from timebin.config import CONFIG_ENV_VAR, InvariantViolation
from timebin.gates import GateReport

FAST = ["--ideal", "--pulses", "2000", "--seed", "5"]


@pytest.fixture(autouse=True)
def _no_config_from_environment(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)


def _body(path) -> list:
    return [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]


@pytest.mark.parametrize("text, expected", [
    ("pi", math.pi),
    ("2pi", 2 * math.pi),
    ("pi/2", math.pi / 2),
    ("-pi/2", -math.pi / 2),
    ("3pi/4", 3 * math.pi / 4),
    ("π", math.pi),
    ("1.25", 1.25),
    ("0", 0.0),
])
def test_parse_phase(text, expected):
    assert cli.parse_phase(text) == pytest.approx(expected)


def test_parse_phase_rejects_garbage():
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_phase("half a turn")


def test_parse_values():
    assert cli.parse_values("-100:100:50") == [-100.0, -50.0, 0.0, 50.0, 100.0]
    assert cli.parse_values("0, 20,40") == [0.0, 20.0, 40.0]
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_values("10:0:5")
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_values("a,b")


def test_hom_scan_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "hom.csv"
    code = cli.main(["hom-scan", *FAST, "--delays", "-600,0,600", "--out", str(out)])
    assert code == cli.EXIT_OK
    text = out.read_text(encoding="utf-8")
    assert "# config_hash: " in text
    assert "# seed: 5" in text
    body = _body(out)
    assert body[0] == ",".join(cli.HOM_HEADER)
    assert len(body) == 4
    assert body[2].split(",")[1] == "0"

    manifest = json.loads((tmp_path / "hom.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "hom-scan"
    assert manifest["seed"] == 5
    assert manifest["outputs"] == [str(out)]
    assert "Dip visibility" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["hom-scan", *FAST, "--delays", "-600,0,600"]
    assert cli.main([*args, "--out", str(first)]) == cli.EXIT_OK
    assert cli.main([*args, "--out", str(second)]) == cli.EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_replay_reproduces_the_run(tmp_path):
    out = tmp_path / "fringe.csv"
    assert cli.main(["fringe-scan", *FAST, "--david-phase", "pi/2", "--out", str(out)]) == cli.EXIT_OK
    replayed = tmp_path / "replayed.csv"
    code = cli.main(["replay", str(tmp_path / "fringe.manifest.json"), "--out", str(replayed)])
    assert code == cli.EXIT_OK
    assert replayed.read_bytes() == out.read_bytes()
    assert _body(out)[0] == ",".join(cli.FRINGE_HEADER)


def test_delay_scan_writes_both_traces(tmp_path):
    out = tmp_path / "delay.csv"
    assert cli.main(["delay-scan", *FAST, "--delays", "-600,0,600", "--out", str(out)]) == cli.EXIT_OK
    assert (tmp_path / "delay_pi.csv").exists()
    assert (tmp_path / "delay_2pi.csv").exists()
    single = tmp_path / "single.csv"
    assert cli.main(["delay-scan", *FAST, "--charlie-phase", "2pi", "--delays", "-600,0,600",
                     "--out", str(single)]) == cli.EXIT_OK
    assert single.exists()


def test_cz_check_writes_a_report(tmp_path):
    out = tmp_path / "cz.json"
    assert cli.main(["cz-check", "--out", str(out)]) == cli.EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert report["success_probabilities"] == pytest.approx([1 / 9] * 4, abs=1e-10)
    assert cli.main(["cz-check", "--extinction-db", "20", "--out", str(out)]) == cli.EXIT_OK


def test_gate_contract_failure_exits_4(tmp_path, monkeypatch):
    broken = GateReport(operator=np.eye(4) / 3.0, success_probabilities=np.full(4, 1 / 9), fidelity=0.25)
    monkeypatch.setattr(cli, "cz_gate_report", lambda compensation, extinction: broken)
    assert cli.main(["cz-check", "--out", str(tmp_path / "cz.json")]) == cli.EXIT_GATE


def test_configuration_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[source]\ncolour = blue\n", encoding="utf-8")
    assert cli.main(["hom-scan", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG
    assert cli.main(["hom-scan", "--pulses", "0", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG
    assert cli.main(["fringe-scan", *FAST, "--phases", "0,1,2,3", "--out", str(tmp_path / "f.csv")]) \
        == cli.EXIT_CONFIG
    assert cli.main(["replay", str(tmp_path / "missing.manifest.json")]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("command, option, values", [
    ("hom-scan", "--delays", "0,-100,100"),
    ("delay-scan", "--delays", "-600,600,600"),
    ("fringe-scan", "--phases", "0,1,2,3,5,4"),
])
def test_unsorted_scan_settings_are_configuration_errors(tmp_path, command, option, values):
    out = tmp_path / "scan.csv"
    assert cli.main([command, *FAST, option, values, "--out", str(out)]) == cli.EXIT_CONFIG
    assert not out.exists()


def test_cz_check_takes_no_config_file(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["cz-check", "--config", str(tmp_path / "lab.ini"), "--out", str(tmp_path / "cz.json")])


def test_runtime_invariant_failures_exit_3(tmp_path, monkeypatch):
    def failing_scan(*args, **kwargs):
        raise InvariantViolation("counts exceed start pulses")

    monkeypatch.setattr(cli, "hom_scan", failing_scan)
    assert cli.main(["hom-scan", *FAST, "--out", str(tmp_path / "x.csv")]) == cli.EXIT_INVARIANT
