"""GHZ-type coherence paradoxes and the local-hidden-variable mixture refuter.

A paradox is a list of expectation-value constraints, each attached to the source
prepared for one input label, plus the claim that one source (the superposed one)
would have to be a classical mixture of the others under any LHV model. Expectation
values are linear in the hidden-variable distribution, so finite mixtures capture
the model exactly.
"""
import itertools
import logging
import math
from collections.abc import Mapping

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.optimize import linprog

from coherence.errors import DimensionMismatchError, InvalidParameterError, MissingObservationError, NumericalError
from coherence.measure import ObservableChain, expectation
from coherence.qstate import (
    DensityOperator,
    StateVector,
    basis_state,
    dicke_one_excitation,
    epr_family,
    weight_one_label,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
GHZ_CHAINS = ("XYY", "YXY", "YYX", "XXX")
GHZ_EXPECTED = (-1.0, -1.0, -1.0, 1.0)

ObservationKey = tuple[str, str]


class Constraint(BaseModel):
    """One row of a paradox: <observable> on the source for ``source_label``."""

    source_label: str
    observable: str
    expected_value: float = Field(ge=-1.0, le=1.0)

    @field_validator("observable")
    @classmethod
    def _valid_chain(cls, value: str) -> str:
        return str(ObservableChain.parse(value))

    @property
    def chain(self) -> ObservableChain:
        return ObservableChain.parse(self.observable)

    @property
    def key(self) -> ObservationKey:
        return (self.source_label, self.observable)


class MixtureClaim(BaseModel):
    """Under LHV, the ``mixed_label`` source is a convex mixture of the component sources."""

    mixed_label: str
    component_labels: list[str]
    note: str = ""


class ParadoxSpec(BaseModel):
    """Constraint list plus the mixture claim it contradicts."""

    name: str
    constraints: list[Constraint]
    mixture_claim: MixtureClaim
    parameters: dict[str, float | int | str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _labels_consistent(self) -> "ParadoxSpec":
        labels = {c.source_label for c in self.constraints}
        claim = self.mixture_claim
        if claim.mixed_label not in labels:
            raise ValueError(f"mixed label '{claim.mixed_label}' has no constraint")
        if len(set(claim.component_labels)) != len(claim.component_labels):
            raise ValueError("component labels must be distinct")
        missing = [label for label in claim.component_labels if label not in labels]
        if missing:
            raise ValueError(f"component labels without constraints: {missing}")
        if claim.mixed_label in claim.component_labels:
            raise ValueError("mixed label cannot also be a component")
        return self

    def theoretical_observations(self) -> dict[ObservationKey, float]:
        return {c.key: c.expected_value for c in self.constraints}

    def mixed_observables(self) -> list[str]:
        """Observables measured on the mixed source, in constraint order."""
        mixed = self.mixture_claim.mixed_label
        return [c.observable for c in self.constraints if c.source_label == mixed]


class ConstraintValue(BaseModel):
    source_label: str
    observable: str
    value: float


class ParadoxVerdict(BaseModel):
    """Outcome of confronting a paradox's values with LHV mixtures."""

    per_constraint_values: list[ConstraintValue]
    lhv_feasible: bool
    violation_gap: float = Field(ge=0.0)
    witness_weights: dict[str, float]
    tolerance: float = DEFAULT_TOL
    deterministic_assignments: int | None = None

    @model_validator(mode="after")
    def _gap_matches_feasibility(self) -> "ParadoxVerdict":
        if self.lhv_feasible != (self.violation_gap == 0.0):
            raise ValueError("violation_gap must be 0 exactly when the values are LHV-feasible")
        return self


def min_max_residual(vertices: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Smallest worst-case residual between ``target`` and a convex combination of rows.

    Solves min t subject to |sum_k w_k vertices[k, c] - target[c]| <= t for every
    column c, w >= 0, sum_k w_k = 1, as a linear program.

    Args:
        vertices: (K, C) array, one row per mixture component
        target: (C,) array to reproduce

    Returns:
        (minimal residual t, optimal weights w)
    """
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    target = np.asarray(target, dtype=float).reshape(-1)
    num_components, num_columns = vertices.shape
    if target.shape[0] != num_columns:
        raise DimensionMismatchError(f"{num_columns} observables per component, {target.shape[0]} targets")

    # variables: w_1..w_K, t
    ones = np.ones((num_columns, 1))
    a_ub = np.vstack([
        np.hstack([vertices.T, -ones]),
        np.hstack([-vertices.T, -ones]),
    ])
    b_ub = np.concatenate([target, -target])
    a_eq = np.hstack([np.ones((1, num_components)), np.zeros((1, 1))])
    cost = np.zeros(num_components + 1)
    cost[-1] = 1.0
    bounds = [(0.0, None)] * num_components + [(0.0, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if not res.success:
        raise NumericalError(f"Mixture linear program failed: {res.message}")
    logger.debug(f"Mixture LP: residual={res.x[-1]:.3e}, status={res.status}")
    weights = np.clip(res.x[:-1], 0.0, None)
    weights = weights / weights.sum()
    return float(max(res.x[-1], 0.0)), weights


def _sign_assignments(num_qubits: int) -> list[dict[str, tuple[int, ...]]]:
    """Every assignment of +-1 outcomes to the X and Y observable of each qubit."""
    assignments = []
    for values in itertools.product((1, -1), repeat=2 * num_qubits):
        assignments.append({"X": values[:num_qubits], "Y": values[num_qubits:]})
    return assignments


def _assignment_value(assignment: dict[str, tuple[int, ...]], chain: ObservableChain) -> int:
    return chain.sign * math.prod(assignment[axis][i] for i, axis in enumerate(chain.axes))


def ghz_stabilizer_check(state: StateVector | DensityOperator, tol: float = DEFAULT_TOL) -> ParadoxVerdict:
    """
    Confront the four GHZ stabilizer correlators of a 3-qubit state with LHV models.

    Deterministic LHV models assign +-1 to every qubit's X and Y measurement, 64
    assignments in total. Correlators that are +-1 within ``tol`` must be reproduced
    exactly by such an assignment; the number of assignments that manage this is
    reported. The verdict itself minimizes the worst-case residual over convex
    mixtures of all 64 assignments, which also covers noisy correlators.

    Args:
        state: Three-qubit state
        tol: Residual below which the values count as LHV-reproducible

    Returns:
        The verdict; the ideal GHZ state is infeasible with gap 1/2
    """
    if tol < 0:
        raise InvalidParameterError(f"Tolerance must be >= 0, got {tol!r}")
    if state.num_qubits != 3:
        raise DimensionMismatchError(f"GHZ stabilizer check needs 3 qubits, got {state.num_qubits}")

    chains = [ObservableChain.parse(text) for text in GHZ_CHAINS]
    values = np.array([expectation(state, chain) for chain in chains])
    assignments = _sign_assignments(3)
    vertices = np.array([[_assignment_value(a, chain) for chain in chains] for a in assignments], dtype=float)

    deterministic = [i for i, value in enumerate(values) if abs(abs(value) - 1.0) <= tol]
    satisfying = sum(
        1 for row in vertices if all(row[i] == round(values[i]) for i in deterministic)
    )
    logger.debug(f"GHZ correlators {values.tolist()}, {satisfying} of 64 assignments satisfy the sharp ones")

    gap, weights = min_max_residual(vertices, values)
    feasible = gap <= tol
    labels = ["".join("+" if s > 0 else "-" for s in a["X"] + a["Y"]) for a in assignments]
    return ParadoxVerdict(
        per_constraint_values=[
            ConstraintValue(source_label="ghz", observable=text, value=float(v))
            for text, v in zip(GHZ_CHAINS, values)
        ],
        lhv_feasible=feasible,
        violation_gap=0.0 if feasible else gap,
        witness_weights={label: float(w) for label, w in zip(labels, weights) if w > 1e-12},
        tolerance=tol,
        deterministic_assignments=satisfying,
    )


def coherence_paradox(theta: float, axis: str = "X") -> ParadoxSpec:
    """
    Five-constraint paradox of the two-source scenario.

    <ZZ> = -1 on the |01> and |10> sources, <AA> = 0 on both, and <AA> = sin(2 theta)
    on the superposed source, with A the chosen axis (X or Y).

    Args:
        theta: Superposition angle in (0, pi/2)
        axis: ``"X"`` or ``"Y"``

    Returns:
        The paradox specification
    """
    axis = axis.upper()
    if axis not in ("X", "Y"):
        raise InvalidParameterError(f"Coherence paradox axis must be X or Y, got '{axis}'")
    if not 0.0 < theta < math.pi / 2:
        raise InvalidParameterError(f"theta must lie in (0, pi/2), got {theta!r}")
    pair = axis * 2
    return ParadoxSpec(
        name=f"coherence-{axis.lower()}",
        constraints=[
            Constraint(source_label="01", observable="ZZ", expected_value=-1.0),
            Constraint(source_label="10", observable="ZZ", expected_value=-1.0),
            Constraint(source_label="01", observable=pair, expected_value=0.0),
            Constraint(source_label="10", observable=pair, expected_value=0.0),
            Constraint(source_label="00", observable=pair, expected_value=math.sin(2.0 * theta)),
        ],
        mixture_claim=MixtureClaim(
            mixed_label="00",
            component_labels=["01", "10"],
            note="lambda_00 = p1 lambda_01 + p2 lambda_10",
        ),
        parameters={"family": "coherence", "theta": theta, "axis": axis},
    )


def dicke_chain(n: int, z_position: int, x_pair: tuple[int, int] | None = None) -> ObservableChain:
    """
    Chain used against the one-excitation Dicke state.

    Without ``x_pair``: X on every qubit except ``z_position``, Z there.
    With ``x_pair``: X on the two given qubits and Z on all others.
    """
    if n < 2:
        raise InvalidParameterError(f"Dicke paradox needs n >= 2, got {n}")
    if not 0 <= z_position < n:
        raise InvalidParameterError(f"z_position {z_position} outside [0, {n})")
    if x_pair is None:
        # Z first, then X on the rest; moved so the Z lands on z_position
        base, leading = ObservableChain(("Z",) + ("X",) * (n - 1)), (z_position,)
    else:
        i, j = x_pair
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise InvalidParameterError(f"x_pair {x_pair} must name two distinct qubits in [0, {n})")
        if z_position in (i, j):
            raise InvalidParameterError(f"z_position {z_position} cannot be part of x_pair {x_pair}")
        base, leading = ObservableChain(("X", "X") + ("Z",) * (n - 2)), (i, j)
    rest = iter(range(len(leading), n))
    order = [leading.index(k) if k in leading else next(rest) for k in range(n)]
    return base.permuted(order)


def dicke_paradox(n: int, z_position: int, x_pair: tuple[int, int] | None = None) -> ParadoxSpec:
    """
    Coherence paradox for the n-qubit Dicke state with one excitation.

    Sources are the n weight-one basis states and the Dicke state, labelled by the
    all-zeros input. Expected values are exact Born-rule values: -1 for the Z chain
    on each basis state, 0 for the mixed chain on each basis state, and the chain's
    Dicke expectation on the superposed source (2/3 for n = 3, 2/n with ``x_pair``).

    Args:
        n: Number of qubits (>= 2)
        z_position: Qubit carrying the Z factor
        x_pair: Optional pair of qubits carrying X, all others carrying Z

    Returns:
        The paradox specification
    """
    chain = dicke_chain(n, z_position, x_pair)
    z_chain = ObservableChain(("Z",) * n)
    components = [weight_one_label(n, p) for p in range(n)]
    mixed = "0" * n
    dicke = dicke_one_excitation(n)

    constraints = [
        Constraint(source_label=label, observable=str(z_chain), expected_value=expectation(basis_state(label), z_chain))
        for label in components
    ]
    constraints += [
        Constraint(source_label=label, observable=str(chain), expected_value=expectation(basis_state(label), chain))
        for label in components
    ]
    constraints.append(Constraint(source_label=mixed, observable=str(chain), expected_value=expectation(dicke, chain)))

    parameters: dict[str, float | int | str] = {"family": "dicke", "n": n, "z_position": z_position}
    if x_pair is not None:
        parameters["x_pair"] = f"{x_pair[0]},{x_pair[1]}"
    return ParadoxSpec(
        name=f"dicke-{n}-{chain}",
        constraints=constraints,
        mixture_claim=MixtureClaim(
            mixed_label=mixed,
            component_labels=components,
            note="lambda_0..0 = sum_i p_i lambda_i over the one-excitation sources",
        ),
        parameters=parameters,
    )


def spec_states(spec: ParadoxSpec) -> dict[str, StateVector]:
    """Pure source state for every label of a coherence or Dicke paradox."""
    family = spec.parameters.get("family")
    labels = {c.source_label for c in spec.constraints}
    if family == "coherence":
        theta = float(spec.parameters["theta"])
        return {label: epr_family(theta, label) for label in labels}
    if family == "dicke":
        mixed = spec.mixture_claim.mixed_label
        return {label: dicke_one_excitation(len(label)) if label == mixed else basis_state(label) for label in labels}
    raise InvalidParameterError(f"No state family known for paradox '{spec.name}'")


def lhv_mixture_test(
    spec: ParadoxSpec,
    observed: Mapping[ObservationKey, float],
    tol: float = DEFAULT_TOL,
) -> ParadoxVerdict:
    """
    Decide whether the mixed source's values are a convex mixture of the components'.

    For every observable measured on the mixed source, the LHV model forces
    observed(mixed, O) = sum_i p_i observed(component_i, O) with one weight vector
    for all O. The worst-case residual of the best weights is the violation gap.

    Args:
        spec: Paradox specification
        observed: Value per (source label, observable) for every constraint
        tol: Residual treated as zero

    Returns:
        The verdict with the optimal mixture weights
    """
    if tol < 0:
        raise InvalidParameterError(f"Tolerance must be >= 0, got {tol!r}")
    normalized = {(label, str(ObservableChain.parse(obs))): float(v) for (label, obs), v in observed.items()}
    for constraint in spec.constraints:
        if constraint.key not in normalized:
            raise MissingObservationError(
                f"No observation for <{constraint.observable}> on source {constraint.source_label}"
            )

    claim = spec.mixture_claim
    observables = spec.mixed_observables()
    target = np.array([normalized[(claim.mixed_label, obs)] for obs in observables])
    vertices = np.empty((len(claim.component_labels), len(observables)))
    for i, label in enumerate(claim.component_labels):
        for j, obs in enumerate(observables):
            if (label, obs) not in normalized:
                raise MissingObservationError(f"No observation for <{obs}> on component source {label}")
            vertices[i, j] = normalized[(label, obs)]

    gap, weights = min_max_residual(vertices, target)
    feasible = gap <= tol
    logger.info(f"LHV mixture test for {spec.name}: gap={gap:.6f}, feasible={feasible}")
    return ParadoxVerdict(
        per_constraint_values=[
            ConstraintValue(source_label=c.source_label, observable=c.observable, value=normalized[c.key])
            for c in spec.constraints
        ],
        lhv_feasible=feasible,
        violation_gap=0.0 if feasible else gap,
        witness_weights={label: float(w) for label, w in zip(claim.component_labels, weights)},
        tolerance=tol,
    )
