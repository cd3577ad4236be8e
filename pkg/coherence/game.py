"""The XOR coherence game.

Two players receive inputs x, y, share the source prepared for (x, y) and win when
a xor b = x xor y. For the input (1, 1) no source is prepared and both players output
uniformly random bits.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel

from coherence.errors import InvalidParameterError
from coherence.measure import INPUT_PAIRS, JointDistribution, LocalObservable, outcome_distribution
from coherence.qstate import EQ_TOL, epr_family

logger = logging.getLogger(__name__)

UNIFORM_ROW = np.full((2, 2), 0.25)

# Named strategies: both players measure the same Pauli observable for every input.
# With outcome 0 <-> eigenvalue +1 this choice reaches 1/2 + sin(2 theta)/8 for X.
STRATEGIES: dict[str, tuple[LocalObservable, LocalObservable]] = {
    "x": (LocalObservable("X"), LocalObservable("X")),
    "z": (LocalObservable("Z"), LocalObservable("Z")),
}


class GameEvaluation(BaseModel):
    """Coherence terms and winning probability of one distribution."""

    i_terms: dict[str, float]
    p_win: float
    identity_holds: bool
    uniform_11_row: bool
    strategy_note: dict[str, str] = {}


def coherence_term(dist: JointDistribution, a: int, b: int) -> float:
    """I_ab = sum over (x, y) of (-1)^(x xor y) P(a, b | x, y)."""
    return float(sum((-1) ** (x ^ y) * dist.probs[a, b, x, y] for x, y in INPUT_PAIRS))


def _p_win(dist: JointDistribution) -> float:
    total = 0.0
    for x, y in INPUT_PAIRS:
        row = dist.row(x, y)
        same, different = row[0, 0] + row[1, 1], row[0, 1] + row[1, 0]
        total += different if x ^ y else same
    return total / 4.0


def classical_identity_check(dist: JointDistribution) -> bool:
    """True iff P_win = 1/2 + (I_00 + I_11)/4 within 1e-10."""
    p_win = _p_win(dist)
    return bool(abs(p_win - 0.5 - (coherence_term(dist, 0, 0) + coherence_term(dist, 1, 1)) / 4.0) <= EQ_TOL)


def winning_probability(dist: JointDistribution, strategy_note: dict[str, str] | None = None) -> GameEvaluation:
    """
    Average winning probability over the four equally likely input pairs.

    Args:
        dist: Outcome distribution of both players
        strategy_note: Free-form description of the observables and states used

    Returns:
        The evaluation with all four coherence terms
    """
    i_terms = {f"{a}{b}": coherence_term(dist, a, b) for a in (0, 1) for b in (0, 1)}
    uniform = bool(np.max(np.abs(dist.row(1, 1) - UNIFORM_ROW)) <= EQ_TOL)
    if not uniform:
        logger.debug("Input (1,1) row is not uniform; P_win still follows the full average")
    return GameEvaluation(
        i_terms=i_terms,
        p_win=_p_win(dist),
        identity_holds=classical_identity_check(dist),
        uniform_11_row=uniform,
        strategy_note=strategy_note or {},
    )


def quantum_strategy(theta: float, m_a: LocalObservable, m_b: LocalObservable) -> JointDistribution:
    """
    Distribution of the quantum strategy on the two-source states.

    Inputs (0,1) and (1,0) receive |01> and |10>, input (0,0) the superposition
    cos(theta)|01> + sin(theta)|10>; each player measures the same observable for
    both of its inputs, and input (1,1) yields uniform random bits.

    Args:
        theta: Superposition angle in (0, pi/2)
        m_a: Player A's observable
        m_b: Player B's observable

    Returns:
        The full outcome distribution
    """
    if not 0.0 < theta < math.pi / 2:
        raise InvalidParameterError(f"theta must lie in (0, pi/2), got {theta!r}")
    states = {(0, 0): epr_family(theta, "00"), (0, 1): epr_family(theta, "01"), (1, 0): epr_family(theta, "10")}
    return outcome_distribution(
        states,
        obs_a={0: m_a, 1: m_a},
        obs_b={0: m_b, 1: m_b},
        fixed_rows={(1, 1): UNIFORM_ROW},
    )


def evaluate_strategy(theta: float, strategy: str) -> GameEvaluation:
    """Winning probability of a named strategy (``"x"`` or ``"z"``) at angle theta."""
    key = strategy.lower()
    if key not in STRATEGIES:
        raise InvalidParameterError(f"Unknown strategy '{strategy}', expected one of {sorted(STRATEGIES)}")
    m_a, m_b = STRATEGIES[key]
    dist = quantum_strategy(theta, m_a, m_b)
    return winning_probability(
        dist,
        strategy_note={"M_A": str(m_a), "M_B": str(m_b), "theta": f"{theta!r}", "states": "psi01, psi10, psi00(theta)"},
    )


def winning_probability_from_correlators(
    e00: float,
    e01: float,
    e10: float,
    std_errs: tuple[float, float, float] | None = None,
) -> tuple[float, float]:
    """
    P_win from the three measured correlators, 1/2 + (E00 - E01 - E10)/8.

    Args:
        e00: Correlator on the superposed source
        e01: Correlator on the |01> source
        e10: Correlator on the |10> source
        std_errs: Optional standard errors of the three correlators

    Returns:
        (P_win, propagated standard error; 0 without std_errs)
    """
    p_win = 0.5 + (e00 - e01 - e10) / 8.0
    if std_errs is None:
        return p_win, 0.0
    return p_win, math.sqrt(sum(s * s for s in std_errs)) / 8.0
