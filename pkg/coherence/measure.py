"""Dichotomic Pauli observables, Born-rule expectations and outcome distributions.

Outcome labels follow M_{0} - M_{1} = M: outcome 0 is the +1 eigenvalue and
outcome 1 the -1 eigenvalue of the (signed) observable.
"""
import itertools
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from coherence.errors import DimensionMismatchError, InvalidParameterError, MissingObservationError, NumericalError
from coherence.qstate import EQ_TOL, DensityOperator, StateVector, density_from_state

logger = logging.getLogger(__name__)

AXES = ("X", "Y", "Z", "I")
MEASUREMENT_AXES = ("X", "Y", "Z")
INPUT_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))
NEGATIVE_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_SQRT_HALF = 1.0 / math.sqrt(2.0)

# Fixed phases: |+>, |->, |+i>, |-i>; tomography depends on them
EIGENBASIS = {
    "X": (np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex), np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex)),
    "Y": (np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex), np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex)),
    "Z": (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)),
}


def _check_axis(axis: str, allowed: Iterable[str] = AXES) -> str:
    axis = str(axis).upper()
    if axis not in allowed:
        raise InvalidParameterError(f"Unknown axis '{axis}', expected one of {tuple(allowed)}")
    return axis


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise InvalidParameterError(f"Observable sign must be +1 or -1, got {sign!r}")
    return int(sign)


@dataclass(frozen=True)
class LocalObservable:
    """A single party's dichotomic observable: sign * sigma_axis."""

    axis: str
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axis", _check_axis(self.axis, MEASUREMENT_AXES))
        object.__setattr__(self, "sign", _check_sign(self.sign))

    @classmethod
    def parse(cls, text: str) -> "LocalObservable":
        """Parse ``"X"``, ``"+Z"`` or ``"-X"``."""
        text = text.strip().upper()
        sign = -1 if text.startswith("-") else 1
        return cls(text.lstrip("+-"), sign)

    @property
    def matrix(self) -> np.ndarray:
        return self.sign * PAULI[self.axis]

    def projector(self, outcome: int) -> np.ndarray:
        """Projector onto the eigenspace reported as ``outcome`` (0 -> +1, 1 -> -1)."""
        if outcome not in (0, 1):
            raise InvalidParameterError(f"Outcome must be 0 or 1, got {outcome!r}")
        plus, minus = EIGENBASIS[self.axis]
        ket = plus if (outcome == 0) == (self.sign == 1) else minus
        return np.outer(ket, ket.conj())

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + self.axis


@dataclass(frozen=True)
class ObservableChain:
    """Tensor product of single-qubit Pauli factors, one per qubit, with an overall sign."""

    axes: tuple[str, ...]
    sign: int = 1

    def __post_init__(self):
        axes = tuple(_check_axis(a) for a in self.axes)
        if not axes:
            raise InvalidParameterError("Observable chain needs at least one factor")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "sign", _check_sign(self.sign))

    @classmethod
    def parse(cls, text: str) -> "ObservableChain":
        """Parse a compact chain such as ``"XYY"`` or ``"-ZZ"``."""
        text = text.strip().upper()
        sign = -1 if text.startswith("-") else 1
        return cls(tuple(text.lstrip("+-")), sign)

    @property
    def num_qubits(self) -> int:
        return len(self.axes)

    @property
    def matrix(self) -> np.ndarray:
        return self.sign * reduce(np.kron, (PAULI[a] for a in self.axes))

    def permuted(self, order: Iterable[int]) -> "ObservableChain":
        """Chain whose factor i is this chain's factor order[i]."""
        return ObservableChain(tuple(self.axes[i] for i in order), self.sign)

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + "".join(self.axes)


def _as_density(state: DensityOperator | StateVector) -> DensityOperator:
    if isinstance(state, StateVector):
        return density_from_state(state)
    return state


def expectation(rho: DensityOperator | StateVector, obs: ObservableChain) -> float:
    """
    Born-rule expectation tr(O rho).

    Args:
        rho: State (a pure StateVector is promoted to its projector)
        obs: Observable chain with one factor per qubit

    Returns:
        Real expectation value in [-1, 1]
    """
    rho = _as_density(rho)
    if obs.num_qubits != rho.num_qubits:
        raise DimensionMismatchError(f"Observable on {obs.num_qubits} qubits, state on {rho.num_qubits}")
    value = np.trace(obs.matrix @ rho.matrix)
    if abs(value.imag) > EQ_TOL:
        raise NumericalError(f"Expectation has imaginary residue {value.imag:.3e}")
    return float(np.clip(value.real, -1.0, 1.0))


def setting_probabilities(
    rho: DensityOperator | StateVector,
    obs_a: LocalObservable,
    obs_b: LocalObservable,
) -> np.ndarray:
    """
    Two-party outcome probabilities P(a, b) for one measurement setting.

    Returns:
        2x2 array indexed [a, b]
    """
    rho = _as_density(rho)
    if rho.num_qubits != 2:
        raise DimensionMismatchError(f"Two-party setting needs a 2-qubit state, got {rho.num_qubits}")
    probs = np.empty((2, 2))
    for a, b in itertools.product((0, 1), repeat=2):
        joint = np.kron(obs_a.projector(a), obs_b.projector(b))
        probs[a, b] = float(np.real(np.trace(joint @ rho.matrix)))
    # round-off can leave -1e-17 entries
    return np.clip(probs, 0.0, None)


@dataclass(frozen=True)
class JointDistribution:
    """Table P(a, b | x, y), stored as an array indexed [a, b, x, y]."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (2, 2, 2, 2):
            raise DimensionMismatchError(f"Expected a 2x2x2x2 table, got {probs.shape}")
        if np.min(probs) < -NEGATIVE_TOL:
            raise InvalidParameterError(f"Negative probability {np.min(probs)!r}")
        sums = probs.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1.0)) > EQ_TOL:
            raise InvalidParameterError(f"Rows are not normalized: sums {sums.tolist()}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_rows(cls, rows: Mapping[tuple[int, int], np.ndarray]) -> "JointDistribution":
        """Assemble the table from one 2x2 [a, b] array per input pair."""
        probs = np.empty((2, 2, 2, 2))
        for x, y in INPUT_PAIRS:
            if (x, y) not in rows:
                raise MissingObservationError(f"No outcome row for input pair ({x},{y})")
            probs[:, :, x, y] = np.asarray(rows[(x, y)], dtype=float)
        return cls(probs)

    @classmethod
    def uniform(cls) -> "JointDistribution":
        return cls(np.full((2, 2, 2, 2), 0.25))

    def row(self, x: int, y: int) -> np.ndarray:
        return np.array(self.probs[:, :, x, y])

    def to_records(self) -> list[dict]:
        """Flat records (a, b, x, y, p) for CSV output."""
        return [
            {"a": a, "b": b, "x": x, "y": y, "p": float(self.probs[a, b, x, y])}
            for x, y in INPUT_PAIRS
            for a, b in itertools.product((0, 1), repeat=2)
        ]


def outcome_distribution(
    states: Mapping[tuple[int, int], DensityOperator | StateVector],
    obs_a: Mapping[int, LocalObservable],
    obs_b: Mapping[int, LocalObservable],
    fixed_rows: Mapping[tuple[int, int], np.ndarray] | None = None,
) -> JointDistribution:
    """
    Born-rule distribution P(a,b|x,y) = tr((M_{a|x} x M_{b|y}) rho_xy).

    Args:
        states: Prepared state per input pair
        obs_a: Party A's observable per input x
        obs_b: Party B's observable per input y
        fixed_rows: Input pairs whose outcome row is prescribed instead of measured

    Returns:
        The full distribution over all four input pairs
    """
    fixed_rows = dict(fixed_rows or {})
    rows: dict[tuple[int, int], np.ndarray] = {}
    for x, y in INPUT_PAIRS:
        if (x, y) in fixed_rows:
            rows[(x, y)] = np.asarray(fixed_rows[(x, y)], dtype=float)
            continue
        if (x, y) not in states:
            raise MissingObservationError(f"No state prepared for input pair ({x},{y})")
        if x not in obs_a or y not in obs_b:
            raise MissingObservationError(f"No observable for input pair ({x},{y})")
        rows[(x, y)] = setting_probabilities(states[(x, y)], obs_a[x], obs_b[y])
    return JointDistribution.from_rows(rows)


def correlator(dist: JointDistribution, x: int, y: int) -> float:
    """Sum over (a, b) of (-1)^(a xor b) P(a,b|x,y)."""
    row = dist.row(x, y)
    return float(row[0, 0] - row[0, 1] - row[1, 0] + row[1, 1])
