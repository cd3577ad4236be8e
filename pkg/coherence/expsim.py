"""Synthetic photon-coincidence experiment.

Every (setting, trial) pair draws Poisson counts from its own RNG stream derived from
(seed, stream id, trial index), so results do not depend on evaluation order. Noise is
carried entirely by the Werner visibility of the prepared states; dark counts and
accidental coincidences are not modelled.
"""
import logging
import math
import sys
import zlib
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel

from coherence.config import ExperimentConfig
from coherence.errors import DegenerateCountsError, DimensionMismatchError, InvalidParameterError, MissingObservationError
from coherence.measure import MEASUREMENT_AXES, LocalObservable, ObservableChain, setting_probabilities
from coherence.paradox import ObservationKey, ParadoxSpec, lhv_mixture_test, min_max_residual, spec_states
from coherence.qstate import DensityOperator, StateVector, density_from_state, werner_mix

logger = logging.getLogger(__name__)

BOOTSTRAP_STREAM = 0xB007
CLASSICAL_VISIBILITY_BOUND = 0.71
MIN_P_VALUE = sys.float_info.min


def stream_id(*parts: str) -> int:
    """Stable 32-bit stream id for a named source/setting combination."""
    return zlib.crc32("|".join(parts).encode("utf-8"))


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key)))


def _check_setting(setting: Sequence[str]) -> tuple[str, str]:
    if len(setting) != 2:
        raise InvalidParameterError(f"A setting names one axis per party, got {setting!r}")
    axes = tuple(str(a).upper() for a in setting)
    for axis in axes:
        if axis not in MEASUREMENT_AXES:
            raise InvalidParameterError(f"Invalid setting axis '{axis}', expected one of {MEASUREMENT_AXES}")
    return axes  # type: ignore[return-value]


@dataclass(frozen=True)
class CountTable:
    """Coincidence counts N_{u,v}^{a,b} of one setting, one 2x2 block per trial."""

    axis_a: str
    axis_b: str
    trials: np.ndarray = field(repr=False)
    config: ExperimentConfig = field(default_factory=ExperimentConfig)
    stream: int = 0

    def __post_init__(self):
        axis_a, axis_b = _check_setting((self.axis_a, self.axis_b))
        trials = np.array(self.trials, dtype=np.int64)
        if trials.ndim == 2:
            trials = trials[np.newaxis]
        if trials.shape[1:] != (2, 2):
            raise DimensionMismatchError(f"Expected (trials, 2, 2) counts, got {trials.shape}")
        if np.min(trials) < 0:
            raise InvalidParameterError("Counts must be nonnegative")
        trials.setflags(write=False)
        object.__setattr__(self, "axis_a", axis_a)
        object.__setattr__(self, "axis_b", axis_b)
        object.__setattr__(self, "trials", trials)

    @classmethod
    def from_counts(cls, setting: Sequence[str], counts, config: ExperimentConfig | None = None, stream: int = 0) -> "CountTable":
        """Wrap a 2x2 (or trials x 2 x 2) array of counts indexed [a, b]."""
        axis_a, axis_b = _check_setting(setting)
        return cls(axis_a, axis_b, np.asarray(counts), config or ExperimentConfig(), stream)

    @property
    def setting(self) -> tuple[str, str]:
        return (self.axis_a, self.axis_b)

    @property
    def pooled(self) -> np.ndarray:
        return self.trials.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.trials.sum())

    def to_records(self) -> list[dict]:
        """Rows with columns u, v, a, b, trial, count."""
        return [
            {"u": self.axis_a, "v": self.axis_b, "a": a, "b": b, "trial": t, "count": int(self.trials[t, a, b])}
            for t in range(self.trials.shape[0])
            for a in (0, 1)
            for b in (0, 1)
        ]


class EstimatedCorrelator(BaseModel):
    """Correlator estimate from coincidence counts."""

    value: float
    std_err: float
    n_total: int
    delta_std_err: float


class PValueResult(BaseModel):
    """Poissonian tail bound on the paradox data under the best LHV mixture."""

    p_value: float
    log10_p: float
    gap: float
    n_mixed: int
    weights: dict[str, float]


class VisibilityScan(BaseModel):
    """Coincidence-rate fringe with its fitted visibility."""

    fixed_angle: float
    angles: list[float]
    rates: list[float]
    offset: float
    amplitude: float
    phase: float
    visibility: float
    raw_visibility: float
    classical_bound: float = CLASSICAL_VISIBILITY_BOUND
    exceeds_classical_bound: bool
    mode: str


def _as_density(state: DensityOperator | StateVector) -> DensityOperator:
    return density_from_state(state) if isinstance(state, StateVector) else state


def simulate_counts(
    state: DensityOperator | StateVector,
    setting: Sequence[str],
    cfg: ExperimentConfig,
    stream: int = 0,
) -> CountTable:
    """
    Draw Poisson coincidence counts for one measurement setting.

    Each outcome (a, b) of each trial is an independent Poisson variable with mean
    pair_rate * efficiency * duration * P(a, b | setting).

    Args:
        state: Two-qubit state at the detectors
        setting: Measurement axis of party A and party B
        cfg: Experiment configuration (carries the seed)
        stream: Stream id separating sources and settings that share a seed

    Returns:
        The count table, reproducible from (seed, stream)
    """
    axis_a, axis_b = _check_setting(setting)
    rho = _as_density(state)
    probs = setting_probabilities(rho, LocalObservable(axis_a), LocalObservable(axis_b))
    mean = cfg.mean_per_trial * probs
    trials = np.empty((cfg.num_trials, 2, 2), dtype=np.int64)
    for t in range(cfg.num_trials):
        trials[t] = _rng(cfg.seed, stream, t).poisson(mean)
    logger.debug(f"Simulated setting {axis_a}{axis_b} stream={stream}: {int(trials.sum())} coincidences")
    return CountTable(axis_a, axis_b, trials, cfg, stream)


def _correlator_values(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    signed = counts[..., 0, 0] - counts[..., 0, 1] - counts[..., 1, 0] + counts[..., 1, 1]
    total = counts.sum(axis=(-1, -2))
    return signed, total


def _point_estimate(counts: CountTable) -> tuple[float, int]:
    signed, total = _correlator_values(counts.pooled)
    if total <= 0:
        raise DegenerateCountsError(f"Setting {counts.axis_a}{counts.axis_b} recorded zero coincidences")
    return float(signed / total), int(total)


def correlator_from_counts(
    counts: CountTable,
    u: str | None = None,
    v: str | None = None,
    replicates: int | None = None,
) -> EstimatedCorrelator:
    """
    Correlator (N00 - N01 - N10 + N11) / (N00 + N01 + N10 + N11) over pooled trials.

    The standard error is a parametric bootstrap: every cell is redrawn from a Poisson
    law with its observed count as mean, and the spread of the replicate estimates is
    reported. The delta-method value sqrt((1 - E^2)/N) is attached as a cross-check.

    Args:
        counts: Count table of one setting
        u: Expected axis of party A (checked when given)
        v: Expected axis of party B (checked when given)
        replicates: Bootstrap replicates, defaulting to the table's config

    Returns:
        The estimate with its uncertainties
    """
    if u is not None and u.upper() != counts.axis_a or v is not None and v.upper() != counts.axis_b:
        raise InvalidParameterError(f"Count table holds setting {counts.setting}, asked for ({u}, {v})")
    value, total = _point_estimate(counts)
    pooled = counts.pooled.astype(float)

    replicates = replicates or counts.config.bootstrap_replicates
    draws = _rng(counts.config.seed, counts.stream, BOOTSTRAP_STREAM).poisson(pooled, size=(replicates, 2, 2))
    rep_signed, rep_total = _correlator_values(draws.astype(float))
    valid = rep_total > 0
    if not np.all(valid):
        logger.warning(f"Dropped {int(np.sum(~valid))} bootstrap replicates with zero coincidences")
    estimates = rep_signed[valid] / rep_total[valid]
    std_err = float(np.std(estimates, ddof=1)) if estimates.size > 1 else 0.0

    return EstimatedCorrelator(
        value=value,
        std_err=std_err,
        n_total=int(total),
        delta_std_err=math.sqrt(max(1.0 - value * value, 0.0) / total),
    )


def _chain_setting(observable: str) -> tuple[str, str]:
    chain = ObservableChain.parse(observable)
    if chain.num_qubits != 2 or chain.sign != 1:
        raise DimensionMismatchError(f"Coincidence counting covers two-party chains only, got {observable}")
    return _check_setting(chain.axes)


def simulate_paradox(spec: ParadoxSpec, cfg: ExperimentConfig) -> dict[ObservationKey, CountTable]:
    """
    Simulate the counts behind every constraint of a two-party paradox.

    Each source is the ideal state mixed with white noise at ``cfg.visibility_v``.

    Returns:
        Count table per (source label, observable)
    """
    states = spec_states(spec)
    tables: dict[ObservationKey, CountTable] = {}
    for constraint in spec.constraints:
        setting = _chain_setting(constraint.observable)
        rho = werner_mix(states[constraint.source_label], cfg.visibility_v)
        tables[constraint.key] = simulate_counts(
            rho, setting, cfg, stream=stream_id(spec.name, constraint.source_label, constraint.observable)
        )
    return tables


def estimate_all(counts: Mapping[ObservationKey, CountTable]) -> dict[ObservationKey, EstimatedCorrelator]:
    """Correlator estimate for every count table."""
    return {key: correlator_from_counts(table) for key, table in counts.items()}


def paradox_p_value(spec: ParadoxSpec, counts: Mapping[ObservationKey, CountTable]) -> PValueResult:
    """
    Upper bound on the chance that an LHV mixture produced the observed mixed-row data.

    Under a mixture with weights w, every coincidence of the mixed source contributes
    an independent +-1 outcome whose mean is sum_i w_i E_i. Hoeffding's inequality
    bounds the probability of an empirical correlator at distance d from that mean by
    exp(-N d^2 / 2). The bound is maximized over the weight simplex (a linear program
    on sqrt(N)-scaled residuals), with component correlators taken at their estimates.

    Args:
        spec: Two-party paradox
        counts: Count table for every constraint

    Returns:
        The bound, its log10, the unscaled gap and the least favourable weights
    """
    for constraint in spec.constraints:
        if constraint.key not in counts:
            raise MissingObservationError(
                f"No counts for <{constraint.observable}> on source {constraint.source_label}"
            )
        if counts[constraint.key].setting != _chain_setting(constraint.observable):
            raise InvalidParameterError(f"Counts for {constraint.key} were taken in setting {counts[constraint.key].setting}")
    estimates = {c.key: _point_estimate(counts[c.key]) for c in spec.constraints}
    observed = {key: value for key, (value, _) in estimates.items()}
    verdict = lhv_mixture_test(spec, observed, tol=0.0)

    claim = spec.mixture_claim
    observables = spec.mixed_observables()
    n_mixed = np.array([estimates[(claim.mixed_label, obs)][1] for obs in observables], dtype=float)
    scale = np.sqrt(n_mixed)
    vertices = np.array([[observed[(label, obs)] for obs in observables] for label in claim.component_labels])
    target = np.array([observed[(claim.mixed_label, obs)] for obs in observables])
    scaled_gap, weights = min_max_residual(vertices * scale, target * scale)

    log_p = -0.5 * scaled_gap**2
    p_value = max(math.exp(log_p), MIN_P_VALUE) if log_p < 0 else 1.0
    logger.info(f"Paradox {spec.name}: gap={verdict.violation_gap:.4f}, log10 p <= {log_p / math.log(10):.2f}")
    return PValueResult(
        p_value=min(p_value, 1.0),
        log10_p=log_p / math.log(10.0),
        gap=verdict.violation_gap,
        n_mixed=int(n_mixed.min()),
        weights={label: float(w) for label, w in zip(claim.component_labels, weights)},
    )


def polarizer_ket(angle: float) -> np.ndarray:
    """Transmitted state of a linear polarizer at ``angle`` (H = |0>, V = |1>)."""
    return np.array([math.cos(angle), math.sin(angle)], dtype=complex)


def polarizer_angle_from_hwp(hwp_angle: float) -> float:
    """A half-wave plate before a PBS acts as a polarizer at twice the plate angle."""
    return 2.0 * hwp_angle


def coincidence_probability(state: DensityOperator | StateVector, angle_a: float, angle_b: float) -> float:
    """Probability that both photons pass polarizers at ``angle_a`` and ``angle_b``."""
    rho = _as_density(state)
    if rho.num_qubits != 2:
        raise DimensionMismatchError(f"Polarizer scan needs a 2-qubit state, got {rho.num_qubits}")
    ket = np.kron(polarizer_ket(angle_a), polarizer_ket(angle_b))
    return float(np.real(np.vdot(ket, rho.matrix @ ket)))


def _fit_fringe(angles: np.ndarray, rates: np.ndarray) -> tuple[float, float, float]:
    design = np.column_stack([np.ones_like(angles), np.cos(2.0 * angles), np.sin(2.0 * angles)])
    (offset, c, s), *_ = np.linalg.lstsq(design, rates, rcond=None)
    return float(offset), float(math.hypot(c, s)), float(math.atan2(s, c))


def visibility_scan(
    state: DensityOperator | StateVector,
    fixed_arm_angle: float,
    scan_grid: Iterable[float],
    cfg: ExperimentConfig | None = None,
    mode: str = "exact",
    stream: int = 0,
) -> VisibilityScan:
    """
    Coincidence rate versus the scanned polarizer angle, with the fringe visibility.

    The fringe offset + amplitude * cos(2 angle - phase) is fitted by least squares
    (the period is fixed by Malus's law) and V = amplitude / offset, which equals
    (max - min)/(max + min) of the fitted curve.

    Args:
        state: Two-qubit state
        fixed_arm_angle: Polarizer angle of path-I in radians
        scan_grid: Polarizer angles of path-II in radians
        cfg: Experiment configuration; rates are pair_rate * efficiency * probability
        mode: ``"exact"`` for expected rates, ``"simulated"`` for Poisson counts
        stream: Stream id for simulated mode

    Returns:
        The scan with its visibility and the classical-bound flag
    """
    cfg = cfg or ExperimentConfig()
    angles = np.array(list(scan_grid), dtype=float)
    if angles.size == 0:
        raise InvalidParameterError("Visibility scan grid is empty")
    if mode not in ("exact", "simulated"):
        raise InvalidParameterError(f"Unknown scan mode '{mode}', expected exact or simulated")

    probs = np.array([coincidence_probability(state, fixed_arm_angle, a) for a in angles])
    detected_rate = cfg.pair_rate * cfg.efficiency
    if mode == "exact":
        rates = detected_rate * probs
    else:
        exposure = cfg.duration_per_setting * cfg.num_trials
        counts = np.array([
            _rng(cfg.seed, stream, i).poisson(detected_rate * exposure * p) for i, p in enumerate(probs)
        ])
        rates = counts / exposure

    r_max, r_min = float(rates.max()), float(rates.min())
    raw_visibility = (r_max - r_min) / (r_max + r_min) if r_max + r_min > 0 else 0.0
    if np.unique(np.round(np.mod(angles, math.pi), 12)).size >= 3:
        offset, amplitude, phase = _fit_fringe(angles, rates)
        visibility = amplitude / offset if offset > 0 else 0.0
    else:
        logger.warning("Fewer than three distinct scan angles; reporting the raw fringe contrast")
        offset, amplitude, phase = (r_max + r_min) / 2.0, (r_max - r_min) / 2.0, 0.0
        visibility = raw_visibility

    return VisibilityScan(
        fixed_angle=fixed_arm_angle,
        angles=angles.tolist(),
        rates=rates.tolist(),
        offset=offset,
        amplitude=amplitude,
        phase=phase,
        visibility=float(visibility),
        raw_visibility=float(raw_visibility),
        exceeds_classical_bound=bool(visibility > CLASSICAL_VISIBILITY_BOUND),
        mode=mode,
    )
