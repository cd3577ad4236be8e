"""Configuration management for the coherence toolkit."""
import logging
from functools import lru_cache
from pathlib import Path

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from coherence.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging settings
    log_level: str = "INFO"

    # Experiment defaults
    config_path: Path | None = None  # plain-text KEY=value experiment config
    seed: int = 20240101

    # Output settings
    output_dir: Path = Path("runs")

    model_config = SettingsConfigDict(
        env_prefix="COHERENCE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the process-wide settings instance (read once from the environment)."""
    return Settings()


class ExperimentConfig(BaseModel):
    """Parameters of one simulated photon-coincidence experiment.

    Defaults follow the reported source: 0.34 MHz pair rate, 60% collection
    efficiency, 100 s per measurement setting and 10 trials.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Source and detection
    pair_rate: float = Field(default=0.34e6, description="coincidences per second")
    duration_per_setting: float = Field(default=100.0, description="seconds per trial")
    efficiency: float = 0.60
    num_trials: int = 10

    # Noise model
    visibility_v: float = 0.99

    # Reproducibility
    seed: int = 20240101
    bootstrap_replicates: int = 1000

    @field_validator("pair_rate", "duration_per_setting")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("must be > 0")
        return value

    @field_validator("num_trials", "bootstrap_replicates")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("visibility_v")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("must lie in [0, 1]")
        return value

    @field_validator("efficiency")
    @classmethod
    def _efficiency_range(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError("must lie in (0, 1]")
        return value

    @field_validator("seed")
    @classmethod
    def _seed_range(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError("must be an unsigned 64-bit integer")
        return value

    @property
    def mean_per_trial(self) -> float:
        """Expected detected coincidences in one trial of one setting."""
        return self.pair_rate * self.efficiency * self.duration_per_setting

    @property
    def mean_per_setting(self) -> float:
        """Expected detected coincidences pooled over all trials of one setting."""
        return self.mean_per_trial * self.num_trials

    @classmethod
    def build(cls, **values) -> "ExperimentConfig":
        """Validate ``values`` and wrap pydantic failures in InvalidParameterError."""
        try:
            return cls(**values)
        except ValidationError as e:
            raise InvalidParameterError(f"Invalid experiment config: {e}") from e

    @classmethod
    def for_total_counts(cls, total: float, num_trials: int = 1, **values) -> "ExperimentConfig":
        """
        Config whose pooled mean per setting equals ``total`` coincidences.

        Args:
            total: Expected coincidences per setting over all trials
            num_trials: Number of trials the total is split over
            **values: Any other ExperimentConfig field

        Returns:
            A config with duration 1 s, unit efficiency and a matching pair rate
        """
        return cls.build(
            pair_rate=total / num_trials,
            duration_per_setting=1.0,
            efficiency=1.0,
            num_trials=num_trials,
            **values,
        )

    @classmethod
    def from_file(cls, path: Path, **overrides) -> "ExperimentConfig":
        """
        Load a plain-text ``KEY=value`` configuration file.

        Keys are case-insensitive field names; blank lines and ``#`` comments are
        ignored. Keyword overrides (typically CLI flags) win over file values.

        Args:
            path: Configuration file
            **overrides: Field values that replace the file's values when not None

        Returns:
            The validated configuration
        """
        path = Path(path)
        if not path.is_file():
            raise InvalidParameterError(f"Experiment config not found: {path}")
        # File keys map onto field names
        raw = {k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None}
        logger.debug(f"Loaded {len(raw)} config keys from {path}")
        # CLI overrides win
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.build(**raw)

    @classmethod
    def resolve(cls, path: Path | None = None, **overrides) -> "ExperimentConfig":
        """
        Resolve the experiment config from an explicit file, the settings default
        (``COHERENCE_CONFIG_PATH``) or built-in defaults, in that order.
        """
        # Explicit path first, then COHERENCE_CONFIG_PATH
        path = path or get_settings().config_path
        if path is not None:
            return cls.from_file(path, **overrides)
        return cls.build(**{k: v for k, v in overrides.items() if v is not None})
