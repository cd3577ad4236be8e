import itertools
import math

import numpy as np
import pytest

from conftest import MEASURED_ANGLES, random_density
from coherence.errors import DimensionMismatchError, InvalidParameterError, MissingObservationError
from coherence.measure import (
    EIGENBASIS,
    INPUT_PAIRS,
    MEASUREMENT_AXES,
    PAULI,
    JointDistribution,
    LocalObservable,
    ObservableChain,
    correlator,
    expectation,
    outcome_distribution,
    setting_probabilities,
)
from coherence.qstate import basis_state, epr_family, ghz_state


class TestObservables:
    @pytest.mark.parametrize("text,axes,sign", [("XYY", ("X", "Y", "Y"), 1), ("-zz", ("Z", "Z"), -1), ("XI", ("X", "I"), 1)])
    def test_chain_parse(self, text, axes, sign):
        chain = ObservableChain.parse(text)
        assert chain.axes == axes
        assert chain.sign == sign

    def test_chain_rejects_unknown_axis(self):
        with pytest.raises(InvalidParameterError):
            ObservableChain.parse("XQ")

    def test_local_rejects_identity(self):
        with pytest.raises(InvalidParameterError):
            LocalObservable("I")

    def test_permuted(self):
        assert str(ObservableChain.parse("XYZ").permuted([2, 0, 1])) == "ZXY"

    @pytest.mark.parametrize("axis", ["X", "Y", "Z"])
    def test_eigenbasis_outcome_convention(self, axis):
        plus, minus = EIGENBASIS[axis]
        np.testing.assert_allclose(PAULI[axis] @ plus, plus, atol=1e-15)
        np.testing.assert_allclose(PAULI[axis] @ minus, -minus, atol=1e-15)

    def test_negated_observable_swaps_projectors(self):
        obs = LocalObservable.parse("-X")
        np.testing.assert_allclose(obs.projector(0), LocalObservable("X").projector(1))


class TestExpectation:
    @pytest.mark.parametrize("theta", MEASURED_ANGLES)
    def test_two_source_values(self, theta):
        psi = epr_family(theta, "00")
        assert expectation(psi, ObservableChain.parse("XX")) == pytest.approx(math.sin(2 * theta))
        assert expectation(psi, ObservableChain.parse("YY")) == pytest.approx(math.sin(2 * theta))
        assert expectation(psi, ObservableChain.parse("ZZ")) == pytest.approx(-1.0)

    def test_ghz_stabilizers(self):
        psi = ghz_state(3)
        values = [expectation(psi, ObservableChain.parse(c)) for c in ("XYY", "YXY", "YYX", "XXX")]
        np.testing.assert_allclose(values, [-1, -1, -1, 1], atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            expectation(basis_state("01"), ObservableChain.parse("XXX"))

    def test_bounded_on_random_states(self, rng):
        chain = ObservableChain.parse("XZ")
        for _ in range(100):
            assert -1.0 <= expectation(random_density(rng, 2), chain) <= 1.0


class TestDistributions:
    def test_setting_probabilities_sum_to_one(self, rng):
        for _ in range(100):
            probs = setting_probabilities(random_density(rng, 2), LocalObservable("X"), LocalObservable("Y"))
            assert probs.min() >= 0.0
            assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_correlator_matches_expectation(self):
        psi = epr_family(math.pi / 6, "00")
        dist = outcome_distribution(
            {(x, y): psi for x in (0, 1) for y in (0, 1)},
            obs_a={0: LocalObservable("X"), 1: LocalObservable("Y")},
            obs_b={0: LocalObservable("X"), 1: LocalObservable("Y")},
        )
        assert correlator(dist, 0, 0) == pytest.approx(expectation(psi, ObservableChain.parse("XX")))
        assert correlator(dist, 1, 1) == pytest.approx(expectation(psi, ObservableChain.parse("YY")))

    def test_missing_state(self):
        with pytest.raises(MissingObservationError):
            outcome_distribution(
                {(0, 0): basis_state("01")},
                obs_a={0: LocalObservable("Z"), 1: LocalObservable("Z")},
                obs_b={0: LocalObservable("Z"), 1: LocalObservable("Z")},
            )

    def test_rejects_unnormalized_rows(self):
        probs = np.full((2, 2, 2, 2), 0.25)
        probs[0, 0, 1, 1] = 0.5
        with pytest.raises(InvalidParameterError):
            JointDistribution(probs)

    def test_records(self):
        records = JointDistribution.uniform().to_records()
        assert len(records) == 16
        assert all(r["p"] == 0.25 for r in records)


class TestMeasurementProperties:
    @pytest.mark.parametrize("axis", MEASUREMENT_AXES)
    @pytest.mark.parametrize("sign", [1, -1])
    def test_projectors_complete(self, axis, sign):
        obs = LocalObservable(axis, sign)
        np.testing.assert_allclose(obs.projector(0) + obs.projector(1), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(obs.projector(0) - obs.projector(1), obs.matrix, atol=1e-12)

    @pytest.mark.parametrize("num_qubits", [1, 2, 3])
    def test_chain_factors_hermitian_unitary_traceless(self, num_qubits):
        for axes in itertools.product(MEASUREMENT_AXES, repeat=num_qubits):
            matrix = ObservableChain(axes).matrix
            np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-12)
            np.testing.assert_allclose(matrix @ matrix, np.eye(2**num_qubits), atol=1e-12)
            assert abs(np.trace(matrix)) <= 1e-12

    def test_correlator_matches_expectation_on_random_states(self, rng):
        for _ in range(100):
            states = {pair: random_density(rng, 2) for pair in INPUT_PAIRS}
            obs_a = {x: LocalObservable(str(rng.choice(MEASUREMENT_AXES)), int(rng.choice([1, -1]))) for x in (0, 1)}
            obs_b = {y: LocalObservable(str(rng.choice(MEASUREMENT_AXES)), int(rng.choice([1, -1]))) for y in (0, 1)}
            dist = outcome_distribution(states, obs_a=obs_a, obs_b=obs_b)
            for x, y in INPUT_PAIRS:
                chain = ObservableChain((obs_a[x].axis, obs_b[y].axis), obs_a[x].sign * obs_b[y].sign)
                assert correlator(dist, x, y) == pytest.approx(expectation(states[(x, y)], chain), abs=1e-10)
