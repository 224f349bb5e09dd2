"""
Runtime settings and the experiment file schema.
"""

import json

import pytest

from conftest import ROOT
from locbench.config import ExperimentFile, load_experiment_file
from locbench.config.system_config import BenchConfig, LoggingConfig, SystemConfig
from locbench.services.errors import ConfigError
from locbench.services.objective import ParamVector

CONFIG_DIR = ROOT / "data" / "configs"


class TestSystemConfig:

    def test_defaults(self, monkeypatch):
        for name in ("LOCBENCH_LOG_LEVEL", "LOCBENCH_OUTPUT_DIR", "LOCBENCH_SHOW_PROGRESS", "LOCBENCH_WARMUP"):
            monkeypatch.delenv(name, raising=False)
        cfg = SystemConfig.from_env()
        assert cfg.logging.level == "INFO"
        assert cfg.paths.output_dir == "./output"
        assert cfg.bench.show_progress is True
        assert cfg.bench.warmup is True

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("LOCBENCH_LOG_LEVEL", "debug")
        monkeypatch.setenv("LOCBENCH_SHOW_PROGRESS", "0")
        monkeypatch.setenv("LOCBENCH_WARMUP", "no")
        assert LoggingConfig.from_env().level == "DEBUG"
        bench = BenchConfig.from_env()
        assert bench.show_progress is False
        assert bench.warmup is False


class TestExperimentFile:

    def test_empty_file_reproduces_field_setup(self):
        cfg = ExperimentFile().to_experiment_config()
        assert cfg.radii == (50.0, 100.0, 150.0, 200.0)
        assert cfg.trials_per_radius == 90
        assert cfg.n_receivers == 4
        assert cfg.suite.solvers == ("grid", "gd", "pso")
        assert cfg.suite.gd.gamma == 0.001
        assert cfg.suite.pso.swarm_size == 100
        assert cfg.signal.p0_true == -58.5

    def test_shipped_field_config_matches_defaults(self):
        assert load_experiment_file(CONFIG_DIR / "field_experiment.json").snapshot() == ExperimentFile().snapshot()

    def test_shipped_reduced_config(self):
        experiment = load_experiment_file(CONFIG_DIR / "reduced_experiment.json")
        cfg = experiment.to_experiment_config(warmup_default=True)
        assert cfg.radii == (50.0, 100.0)
        assert cfg.trials_per_radius == 10
        assert cfg.warmup is False
        assert cfg.master_seed == 7

    def test_warmup_default_applies_when_unset(self):
        assert ExperimentFile().to_experiment_config(warmup_default=False).warmup is False

    def test_grid_center(self):
        experiment = ExperimentFile.model_validate({"grid": {"center": {"x": 1, "y": 2, "p0": -60, "b": 1300}}})
        assert experiment.solver_suite().grid.center == ParamVector(1.0, 2.0, -60.0, 1300.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="config file not found"):
            load_experiment_file(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_experiment_file(path)

    @pytest.mark.parametrize("data", [
        {"gd": {"gamma": 0.001, "momentum": 0.9}},
        {"solvers": ["grid", "newton"]},
        {"scenario": {"trials_per_radius": 0}},
        {"pso": {"swarm_size": 0}},
        {"signal": {"sigma_rss": -1}},
        {"objective": {"residual_units": "feet"}},
        {"grid": {"b_half_span": 0}},
        {"grid": {"p0_half_span": 0}},
        {"grid": {"span_factor": 0}},
    ])
    def test_invalid_contents(self, tmp_path, data):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_experiment_file(path)
