#!/usr/bin/env python3
"""Tests for configuration defaults, INI loading and validation."""

import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin.config import (
    CONFIG_ENV_VAR, ConfigError, ConfigurationFactory, PairStatistics, RunConfig, SwitchConfig,
    TimebinConfig, config_from_dict, load_config,
)


def _write(tmp_path, text: str) -> str:
    path = tmp_path / "timebin.ini"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_defaults_are_the_laboratory_conditions():
    config = TimebinConfig()
    assert config.source.mu == 0.25
    assert config.source.statistics is PairStatistics.THERMAL
    assert config.source.pulse_fwhm_ps == 60.0
    assert config.detectors.efficiency == 0.08
    assert config.detectors.dark_prob_per_gate == 2e-6
    assert config.switch.extinction_db == 20.0
    assert config.switch.insertion_loss_db == 4.0


def test_empty_file_reproduces_the_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    assert load_config(_write(tmp_path, "")) == TimebinConfig()
    assert load_config() == TimebinConfig()


def test_ini_values_are_typed(tmp_path):
    path = _write(tmp_path, """
[source]
mu = 0.1
statistics = Poissonian

[switch]
extinction_db = inf

[run]
pulses = 5000
ideal = yes
""")
    config = load_config(path)
    assert config.source.mu == 0.1
    assert config.source.statistics is PairStatistics.POISSONIAN
    assert math.isinf(config.switch.extinction_db)
    assert config.run.pulses == 5000
    assert config.run.ideal is True


def test_environment_variable_names_the_default_file(tmp_path, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV_VAR, _write(tmp_path, "[run]\nseed = 7\n"))
    assert load_config().run.seed == 7


@pytest.mark.parametrize("text", [
    "[source]\ncolour = blue\n",
    "[lasers]\npower = 1\n",
    "[run]\npulses = many\n",
    "[run]\nideal = perhaps\n",
    "[source]\nmu = -1\n",
    "[run]\nworkers = 0\n",
    "not an ini file",
])
def test_invalid_files_are_config_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.ini"))


def test_snapshot_round_trip_and_hash():
    config = ConfigurationFactory.ideal(seed=11)
    restored = config_from_dict(config.to_dict())
    assert restored == config
    assert restored.config_hash() == config.config_hash()
    assert config.config_hash() != ConfigurationFactory.laboratory_conditions(seed=11).config_hash()


def test_with_overrides_revalidates():
    config = TimebinConfig().with_overrides("switch", extinction_db=30.0)
    assert config.switch.extinction_db == 30.0
    with pytest.raises(ConfigError):
        TimebinConfig().with_overrides("switch", insertion_loss_db=-1.0)
    with pytest.raises(ConfigError):
        TimebinConfig().with_overrides("optics", gain=1.0)


def test_section_validation():
    with pytest.raises(ConfigError):
        SwitchConfig(extinction_db=float("nan"))
    with pytest.raises(ConfigError):
        RunConfig(t_max=1)


def test_factory_presets():
    assert ConfigurationFactory.ideal().run.ideal
    assert ConfigurationFactory.ideal().detectors.efficiency == 1.0
    assert ConfigurationFactory.low_mu(0.05).source.mu == 0.05
    assert ConfigurationFactory.laboratory_conditions(seed=3).run.seed == 3
