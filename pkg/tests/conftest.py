"""Shared fixtures for the coherence test suite."""
import math

import numpy as np
import pytest

from coherence.config import ExperimentConfig, get_settings
from coherence.qstate import DensityOperator, StateVector

MEASURED_ANGLES = (math.pi / 12, math.pi / 8, math.pi / 6, math.pi / 4)


def random_state(rng: np.random.Generator, num_qubits: int) -> StateVector:
    amplitudes = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return StateVector.from_amplitudes(amplitudes, normalize=True)


def random_density(rng: np.random.Generator, num_qubits: int, rank: int | None = None) -> DensityOperator:
    dim = 2**num_qubits
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2.0
    return DensityOperator(num_qubits, rho / np.trace(rho).real)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """A config with enough counts for percent-level estimates that runs in milliseconds."""
    return ExperimentConfig.for_total_counts(1e5, num_trials=10, visibility_v=0.99, seed=7, bootstrap_replicates=200)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep COHERENCE_* variables from the developer's shell out of the tests."""
    for name in ("COHERENCE_CONFIG_PATH", "COHERENCE_SEED", "COHERENCE_LOG_LEVEL", "COHERENCE_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
