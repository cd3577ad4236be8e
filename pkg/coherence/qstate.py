"""Dense state vectors, density operators and the state families used by the paradoxes.

Qubit 0 is the leftmost tensor factor (party A, path-I) and basis indices are the
big-endian bit strings, so ``|01>`` is index 1 and ``|10>`` is index 2.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from coherence.errors import DimensionMismatchError, InvalidParameterError, NumericalError

logger = logging.getLogger(__name__)

MAX_QUBITS = 10
NORM_TOL = 1e-12
EQ_TOL = 1e-10
PSD_TOL = 1e-10
SQRT_RESIDUAL_TOL = 1e-10

KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)

EPR_LABELS = ("01", "10", "00")


def _check_num_qubits(num_qubits: int, minimum: int = 1) -> None:
    if not isinstance(num_qubits, (int, np.integer)) or num_qubits < minimum:
        raise InvalidParameterError(f"Need at least {minimum} qubit(s), got {num_qubits}")
    if num_qubits > MAX_QUBITS:
        raise InvalidParameterError(f"Dense simulation is limited to {MAX_QUBITS} qubits, got {num_qubits}")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StateVector:
    """Unit-norm amplitude vector on ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        amplitudes = _frozen(self.amplitudes).reshape(-1)
        if amplitudes.shape[0] != 2**self.num_qubits:
            raise DimensionMismatchError(
                f"{self.num_qubits} qubits need {2**self.num_qubits} amplitudes, got {amplitudes.shape[0]}"
            )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"State vector norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        """Build a state from raw amplitudes, optionally normalizing them first."""
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        num_qubits = int(round(math.log2(amplitudes.shape[0]))) if amplitudes.shape[0] else 0
        if 2**num_qubits != amplitudes.shape[0]:
            raise DimensionMismatchError(f"Length {amplitudes.shape[0]} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amplitudes)
            if norm == 0:
                raise InvalidParameterError("Cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        return cls(num_qubits, amplitudes)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, trace-one, positive semidefinite matrix on ``num_qubits`` qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        matrix = _frozen(self.matrix)
        dim = 2**self.num_qubits
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(f"{self.num_qubits} qubits need a {dim}x{dim} matrix, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > NORM_TOL:
            raise InvalidParameterError("Density operator is not Hermitian")
        trace = np.trace(matrix)
        if abs(trace - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"Density operator trace is {trace.real!r}, expected 1")
        min_eig = float(np.min(np.linalg.eigvalsh(matrix)))
        if min_eig < -PSD_TOL:
            raise InvalidParameterError(f"Density operator has negative eigenvalue {min_eig!r}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol: float = EQ_TOL) -> bool:
        return abs(self.purity - 1.0) <= tol

    def dominant_vector(self) -> np.ndarray:
        """Eigenvector of the largest eigenvalue (the state itself when pure)."""
        _, vectors = np.linalg.eigh(self.matrix)
        return vectors[:, -1]


def basis_state(bits: str) -> StateVector:
    """Computational basis state for a big-endian bit string such as ``"010"``."""
    if not bits or any(b not in "01" for b in bits):
        raise InvalidParameterError(f"Basis label must be a non-empty bit string, got '{bits}'")
    _check_num_qubits(len(bits))
    amplitudes = np.zeros(2 ** len(bits), dtype=complex)
    amplitudes[int(bits, 2)] = 1.0
    return StateVector(len(bits), amplitudes)


def tensor(*kets: np.ndarray) -> np.ndarray:
    """Kronecker product of single-qubit kets, leftmost factor first."""
    out = np.array([1.0], dtype=complex)
    for ket in kets:
        out = np.kron(out, ket)
    return out


def epr_family(theta: float, label: str) -> StateVector:
    """
    State prepared for the input pair ``label`` of the two-source scenario.

    Args:
        theta: Superposition angle, used only for label ``"00"``
        label: ``"01"`` -> |0>|1>, ``"10"`` -> |1>|0>, ``"00"`` -> cos(theta)|01> + sin(theta)|10>

    Returns:
        The two-qubit state
    """
    if label == "01":
        return StateVector(2, tensor(KET_0, KET_1))
    if label == "10":
        return StateVector(2, tensor(KET_1, KET_0))
    if label == "00":
        if not 0.0 < theta < math.pi / 2:
            raise InvalidParameterError(
                f"theta must lie in (0, pi/2) for the superposed source, got {theta!r}"
            )
        amplitudes = math.cos(theta) * tensor(KET_0, KET_1) + math.sin(theta) * tensor(KET_1, KET_0)
        return StateVector(2, amplitudes)
    raise InvalidParameterError(f"Unknown input pair '{label}', expected one of {EPR_LABELS}")


def ghz_state(n: int) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2) on n >= 2 qubits."""
    _check_num_qubits(n, minimum=2)
    amplitudes = np.zeros(2**n, dtype=complex)
    amplitudes[0] = amplitudes[-1] = 1.0 / math.sqrt(2.0)
    return StateVector(n, amplitudes)


def dicke_one_excitation(n: int) -> StateVector:
    """Uniform superposition of the n weight-one basis states, amplitude 1/sqrt(n) each."""
    _check_num_qubits(n, minimum=2)
    amplitudes = np.zeros(2**n, dtype=complex)
    for position in range(n):
        amplitudes[1 << (n - 1 - position)] = 1.0 / math.sqrt(n)
    return StateVector(n, amplitudes)


def weight_one_label(n: int, position: int) -> str:
    """Bit string with a single 1 at ``position`` (qubit 0 leftmost)."""
    if not 0 <= position < n:
        raise InvalidParameterError(f"Position {position} outside [0, {n})")
    return "".join("1" if i == position else "0" for i in range(n))


def density_from_state(psi: StateVector) -> DensityOperator:
    """Projector |psi><psi|."""
    return DensityOperator(psi.num_qubits, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def werner_mix(psi: StateVector, v: float) -> DensityOperator:
    """
    Mix a pure state with white noise: v|psi><psi| + (1 - v) I / 2^n.

    Args:
        psi: Target pure state
        v: Visibility in [0, 1]

    Returns:
        The noisy density operator
    """
    if not 0.0 <= v <= 1.0:
        raise InvalidParameterError(f"Visibility must lie in [0, 1], got {v!r}")
    projector = np.outer(psi.amplitudes, psi.amplitudes.conj())
    if v == 1.0:
        return DensityOperator(psi.num_qubits, projector)
    noise = np.eye(psi.dim, dtype=complex) / psi.dim
    return DensityOperator(psi.num_qubits, v * projector + (1.0 - v) * noise)


def werner_fidelity(v: float, num_qubits: int = 2) -> float:
    """Closed-form fidelity of werner_mix(psi, v) with respect to psi."""
    dim = 2**num_qubits
    return math.sqrt(v + (1.0 - v) / dim)


def visibility_for_fidelity(fidelity_value: float, num_qubits: int = 2) -> float:
    """Werner visibility whose closed-form fidelity equals ``fidelity_value``."""
    dim = 2**num_qubits
    floor = math.sqrt(1.0 / dim)
    if not floor <= fidelity_value <= 1.0:
        raise InvalidParameterError(f"Fidelity {fidelity_value!r} is not reachable by white-noise mixing")
    return (dim * fidelity_value**2 - 1.0) / (dim - 1.0)


def psd_sqrt(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Square root of a Hermitian positive semidefinite matrix.

    Negative eigenvalues from round-off are clipped to zero; the clipped mass is
    returned so callers can log it.

    Args:
        matrix: Hermitian matrix

    Returns:
        (square root, total magnitude of clipped negative eigenvalues)
    """
    hermitian = (matrix + matrix.conj().T) / 2.0
    values, vectors = np.linalg.eigh(hermitian)
    clip_mass = float(-np.sum(values[values < 0.0]))
    root = (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T
    scale = max(1.0, float(np.max(np.abs(hermitian))))
    residual = float(np.max(np.abs(root @ root - hermitian)))
    if residual > SQRT_RESIDUAL_TOL * scale + clip_mass:
        raise NumericalError(f"Matrix square root residual {residual:.3e} exceeds {SQRT_RESIDUAL_TOL:.0e}")
    return root, clip_mass


def fidelity(rho: DensityOperator, rho0: DensityOperator) -> float:
    """
    Uhlmann fidelity tr sqrt(sqrt(rho) rho0 sqrt(rho)), without the outer square.

    When either argument is pure this reduces to sqrt(<psi|sigma|psi>), which is
    evaluated directly.
    """
    if rho.num_qubits != rho0.num_qubits:
        raise DimensionMismatchError(f"{rho.num_qubits} vs {rho0.num_qubits} qubits")
    for pure, other in ((rho0, rho), (rho, rho0)):
        if pure.is_pure():
            psi = pure.dominant_vector()
            overlap = float(np.real(np.vdot(psi, other.matrix @ psi)))
            return float(np.clip(math.sqrt(max(overlap, 0.0)), 0.0, 1.0))

    root, clip_mass = psd_sqrt(rho.matrix)
    inner = root @ rho0.matrix @ root
    values = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    negative = float(-np.sum(values[values < 0.0]))
    if clip_mass or negative:
        logger.debug(f"Fidelity clipped negative eigenvalue mass {clip_mass + negative:.3e}")
    value = float(np.sum(np.sqrt(np.clip(values, 0.0, None))))
    return float(np.clip(value, 0.0, 1.0))
