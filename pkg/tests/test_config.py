from pathlib import Path

import pytest
from pydantic import ValidationError

from coherence.config import ExperimentConfig, Settings, get_settings
from coherence.errors import InvalidParameterError


def write_config(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


class TestSettings:
    def test_defaults(self):
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.config_path is None
        assert settings.output_dir == Path("runs")

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("COHERENCE_SEED", "99")
        monkeypatch.setenv("COHERENCE_LOG_LEVEL", "debug")
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.seed == 99
        assert settings.log_level == "debug"


class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.pair_rate == 0.34e6
        assert cfg.num_trials == 10
        assert cfg.mean_per_trial == pytest.approx(0.34e6 * 0.6 * 100)

    def test_for_total_counts(self):
        cfg = ExperimentConfig.for_total_counts(1e5, num_trials=4)
        assert cfg.mean_per_setting == pytest.approx(1e5)
        assert cfg.mean_per_trial == pytest.approx(2.5e4)

    @pytest.mark.parametrize(
        "field,value",
        [("visibility_v", 1.5), ("efficiency", 0.0), ("num_trials", 0), ("pair_rate", -1.0), ("seed", -3)],
    )
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(InvalidParameterError):
            ExperimentConfig.build(**{field: value})

    def test_frozen(self):
        cfg = ExperimentConfig()
        with pytest.raises(ValidationError):
            cfg.seed = 5

    def test_from_file(self, tmp_path):
        path = write_config(tmp_path / "exp.cfg", "# source\nPAIR_RATE=1000\nnum_trials=3\n\nVISIBILITY_V=0.9\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.pair_rate == 1000.0
        assert cfg.num_trials == 3
        assert cfg.visibility_v == 0.9

    def test_overrides_win(self, tmp_path):
        path = write_config(tmp_path / "exp.cfg", "SEED=1\n")
        assert ExperimentConfig.from_file(path, seed=42).seed == 42
        assert ExperimentConfig.from_file(path, seed=None).seed == 1

    def test_unknown_key(self, tmp_path):
        path = write_config(tmp_path / "exp.cfg", "PAIR_RATES=10\n")
        with pytest.raises(InvalidParameterError):
            ExperimentConfig.from_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            ExperimentConfig.from_file(tmp_path / "absent.cfg")

    def test_resolve_uses_environment_path(self, tmp_path, monkeypatch):
        path = write_config(tmp_path / "exp.cfg", "NUM_TRIALS=7\n")
        monkeypatch.setenv("COHERENCE_CONFIG_PATH", str(path))
        get_settings.cache_clear()
        assert ExperimentConfig.resolve().num_trials == 7

    def test_resolve_defaults(self):
        assert ExperimentConfig.resolve(seed=None) == ExperimentConfig()
