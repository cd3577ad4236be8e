"""Two-qubit state tomography from coincidence counts.

Nine local Pauli settings {X,Y,Z} x {X,Y,Z} are measured. The linear-inversion
estimate is projected onto density matrices by moving its eigenvalues to the nearest
point of the probability simplex, which is the Frobenius-closest physical state.
"""
import itertools
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from coherence.config import ExperimentConfig
from coherence.errors import DegenerateCountsError, MissingObservationError
from coherence.expsim import CountTable, simulate_counts, stream_id
from coherence.measure import MEASUREMENT_AXES, PAULI, LocalObservable, setting_probabilities
from coherence.qstate import (
    DensityOperator,
    StateVector,
    density_from_state,
    epr_family,
    fidelity,
    werner_fidelity,
    werner_mix,
)

logger = logging.getLogger(__name__)

CLIP_WARNING = 0.05
TOMOGRAPHY_ANGLES = {
    "psi00(pi/12)": math.pi / 12,
    "psi00(pi/8)": math.pi / 8,
    "psi00(pi/6)": math.pi / 6,
    "psi00(pi/4)": math.pi / 4,
}

Setting = tuple[str, str]


def tomography_settings() -> list[Setting]:
    """The full {X,Y,Z} x {X,Y,Z} grid of local measurement settings."""
    return list(itertools.product(MEASUREMENT_AXES, repeat=2))


def prepared_states() -> dict[str, StateVector]:
    """The six prepared two-photon states, in reporting order."""
    states = {"psi01": epr_family(0.0, "01")}
    states.update({label: epr_family(theta, "00") for label, theta in TOMOGRAPHY_ANGLES.items()})
    states["psi10"] = epr_family(0.0, "10")
    return states


@dataclass(frozen=True)
class TomographyResult:
    """Reconstructed state with its diagnostics."""

    rho_hat: DensityOperator
    rho_linear: np.ndarray = field(repr=False)
    correlations: np.ndarray = field(repr=False)
    settings_used: list[Setting]
    clip_magnitude: float
    fidelity_to_target: float | None = None


def project_to_density(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Nearest trace-one positive semidefinite matrix in Frobenius norm.

    The eigenvectors are kept and the eigenvalues are projected onto the probability
    simplex (sort, find the shift that restores unit trace, clip at zero).

    Args:
        matrix: Hermitian matrix

    Returns:
        (projected matrix, total magnitude of the negative eigenvalues removed)
    """
    hermitian = (matrix + matrix.conj().T) / 2.0
    values, vectors = np.linalg.eigh(hermitian)
    clip_mass = float(-np.sum(values[values < 0.0]))
    projected_values = project_to_simplex(values)
    projected = (vectors * projected_values) @ vectors.conj().T
    return (projected + projected.conj().T) / 2.0, clip_mass


def project_to_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto {p >= 0, sum p = 1}."""
    values = np.asarray(values, dtype=float)
    ordered = np.sort(values)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    index = np.arange(1, values.size + 1)
    active = ordered - cumulative / index > 0
    rank = index[active][-1]
    shift = cumulative[active][-1] / rank
    return np.clip(values - shift, 0.0, None)


def _signed_fractions(pooled: np.ndarray) -> tuple[float, float, float]:
    """(<A x B>, <A x I>, <I x B>) estimated from one setting's pooled counts."""
    total = pooled.sum()
    corr = (pooled[0, 0] - pooled[0, 1] - pooled[1, 0] + pooled[1, 1]) / total
    marginal_a = (pooled[0, :].sum() - pooled[1, :].sum()) / total
    marginal_b = (pooled[:, 0].sum() - pooled[:, 1].sum()) / total
    return float(corr), float(marginal_a), float(marginal_b)


def correlation_matrix(counts: Mapping[Setting, CountTable]) -> np.ndarray:
    """
    4x4 table T[mu, nu] = <sigma_mu x sigma_nu> over {I, X, Y, Z}.

    Single-party terms average the marginal over the partner's three bases.
    """
    table = np.zeros((4, 4))
    table[0, 0] = 1.0
    marginal_a = {axis: [] for axis in MEASUREMENT_AXES}
    marginal_b = {axis: [] for axis in MEASUREMENT_AXES}
    for axis_a, axis_b in tomography_settings():
        if (axis_a, axis_b) not in counts:
            raise MissingObservationError(f"No counts for tomography setting {axis_a}{axis_b}")
        pooled = counts[(axis_a, axis_b)].pooled.astype(float)
        if pooled.sum() <= 0:
            raise DegenerateCountsError(f"Tomography setting {axis_a}{axis_b} recorded zero coincidences")
        corr, m_a, m_b = _signed_fractions(pooled)
        table[1 + MEASUREMENT_AXES.index(axis_a), 1 + MEASUREMENT_AXES.index(axis_b)] = corr
        marginal_a[axis_a].append(m_a)
        marginal_b[axis_b].append(m_b)
    for k, axis in enumerate(MEASUREMENT_AXES, start=1):
        table[k, 0] = float(np.mean(marginal_a[axis]))
        table[0, k] = float(np.mean(marginal_b[axis]))
    return table


def linear_inversion(table: np.ndarray) -> np.ndarray:
    """rho = 1/4 sum_{mu,nu} T[mu, nu] sigma_mu x sigma_nu."""
    basis = ("I",) + MEASUREMENT_AXES
    rho = np.zeros((4, 4), dtype=complex)
    for (i, p), (j, q) in itertools.product(enumerate(basis), repeat=2):
        rho += table[i, j] * np.kron(PAULI[p], PAULI[q])
    return rho / 4.0


def reconstruct(counts: Mapping[Setting, CountTable], target: DensityOperator | StateVector | None = None) -> TomographyResult:
    """
    Reconstruct a two-qubit state from the nine-setting counts.

    Args:
        counts: Count table per (axis A, axis B) setting
        target: Optional ideal state to score the reconstruction against

    Returns:
        The projected estimate, the raw linear estimate and the clip mass
    """
    table = correlation_matrix(counts)
    rho_linear = linear_inversion(table)
    projected, clip_mass = project_to_density(rho_linear)
    if clip_mass > CLIP_WARNING:
        logger.warning(f"Tomography removed {clip_mass:.4f} of negative eigenvalue mass")
    else:
        logger.debug(f"Tomography clip mass {clip_mass:.3e}")
    rho_hat = DensityOperator(2, projected)

    score = None
    if target is not None:
        target = density_from_state(target) if isinstance(target, StateVector) else target
        score = fidelity(rho_hat, target)
    return TomographyResult(
        rho_hat=rho_hat,
        rho_linear=rho_linear,
        correlations=table,
        settings_used=tomography_settings(),
        clip_magnitude=clip_mass,
        fidelity_to_target=score,
    )


def ideal_counts(state: DensityOperator | StateVector, total_per_setting: float) -> dict[Setting, CountTable]:
    """Expected counts (rounded) for every setting: the noiseless large-count limit."""
    tables = {}
    for axis_a, axis_b in tomography_settings():
        probs = setting_probabilities(state, LocalObservable(axis_a), LocalObservable(axis_b))
        tables[(axis_a, axis_b)] = CountTable.from_counts((axis_a, axis_b), np.rint(probs * total_per_setting))
    return tables


def simulate_tomography(state: DensityOperator | StateVector, cfg: ExperimentConfig, label: str = "") -> dict[Setting, CountTable]:
    """Poisson counts for all nine settings, one RNG stream per (label, setting)."""
    return {
        setting: simulate_counts(state, setting, cfg, stream=stream_id("tomo", label, *setting))
        for setting in tomography_settings()
    }


def bootstrap_fidelity(
    counts: Mapping[Setting, CountTable],
    target: DensityOperator | StateVector,
    replicates: int = 200,
    seed: int = 0,
) -> float:
    """
    Standard deviation of the reconstructed fidelity under Poisson resampling.

    Every cell of every setting is redrawn with its observed count as mean and the
    state is reconstructed again.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream_id("tomo-bootstrap"),)))
    scores = []
    for _ in range(replicates):
        resampled = {
            setting: CountTable.from_counts(setting, rng.poisson(table.pooled))
            for setting, table in counts.items()
        }
        try:
            scores.append(reconstruct(resampled, target).fidelity_to_target)
        except DegenerateCountsError:
            continue
    return float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0


def tomography_report(
    states: Mapping[str, StateVector],
    cfg: ExperimentConfig,
    visibilities: Mapping[str, float] | None = None,
    bootstrap_replicates: int = 200,
) -> tuple[list[dict], dict[str, TomographyResult]]:
    """
    Simulate and reconstruct every state, scoring each against its ideal version.

    Args:
        states: Ideal pure state per label
        cfg: Experiment configuration; ``visibility_v`` is the default noise level
        visibilities: Per-label visibility overriding ``cfg.visibility_v``
        bootstrap_replicates: Replicates for the fidelity error bar (0 disables it)

    Returns:
        (fidelity table rows, reconstruction per label)
    """
    visibilities = dict(visibilities or {})
    rows: list[dict] = []
    results: dict[str, TomographyResult] = {}
    for label, psi in states.items():
        v = visibilities.get(label, cfg.visibility_v)
        counts = simulate_tomography(werner_mix(psi, v), cfg, label)
        result = reconstruct(counts, psi)
        spread = bootstrap_fidelity(counts, psi, bootstrap_replicates, cfg.seed) if bootstrap_replicates > 1 else 0.0
        results[label] = result
        rows.append({
            "state": label,
            "visibility": v,
            "fidelity": result.fidelity_to_target,
            "fidelity_std_err": spread,
            "werner_fidelity": werner_fidelity(v),
            "clip_magnitude": result.clip_magnitude,
            "max_abs_imag": float(np.max(np.abs(result.rho_hat.matrix.imag))),
        })
        logger.info(f"Tomography {label}: F={result.fidelity_to_target:.4f} +- {spread:.4f} (v={v:.4f})")
    return rows, results


def density_csv_rows(label: str, matrix: np.ndarray) -> list[dict]:
    """Row-major dump of a density matrix as two blocks, real part then imaginary part."""
    rows = []
    for part, values in (("Re", matrix.real), ("Im", matrix.imag)):
        for r in range(values.shape[0]):
            row = {"state": label, "part": part, "row": r}
            row.update({f"c{c}": float(values[r, c]) for c in range(values.shape[1])})
            rows.append(row)
    return rows
