import math

import numpy as np
import pytest

from conftest import MEASURED_ANGLES
from coherence.errors import InvalidParameterError
from coherence.game import (
    UNIFORM_ROW,
    classical_identity_check,
    coherence_term,
    evaluate_strategy,
    quantum_strategy,
    winning_probability,
    winning_probability_from_correlators,
)
from coherence.measure import JointDistribution, LocalObservable

X_STRATEGY_VALUES = {
    math.pi / 12: 0.5625,
    math.pi / 8: 0.5884,
    math.pi / 6: 0.6083,
    math.pi / 4: 0.6250,
}


def random_distribution(rng: np.random.Generator) -> JointDistribution:
    probs = rng.random((2, 2, 2, 2))
    return JointDistribution(probs / probs.sum(axis=(0, 1), keepdims=True))


class TestStrategies:
    @pytest.mark.parametrize("theta,expected", X_STRATEGY_VALUES.items())
    def test_x_strategy(self, theta, expected):
        evaluation = evaluate_strategy(theta, "x")
        assert evaluation.p_win == pytest.approx(expected, abs=5e-5)
        assert evaluation.p_win == pytest.approx(0.5 + math.sin(2 * theta) / 8)
        assert evaluation.uniform_11_row

    @pytest.mark.parametrize("theta", MEASURED_ANGLES)
    def test_z_strategy(self, theta):
        evaluation = evaluate_strategy(theta, "Z")
        assert evaluation.p_win == pytest.approx(0.625)
        assert evaluation.i_terms["00"] == pytest.approx(0.25)
        assert evaluation.i_terms["11"] == pytest.approx(0.25)
        assert evaluation.i_terms["01"] == pytest.approx(math.cos(theta) ** 2 - 0.75)
        assert evaluation.i_terms["10"] == pytest.approx(math.sin(theta) ** 2 - 0.75)

    def test_z_strategy_symmetric_terms_at_pi_over_4(self):
        evaluation = evaluate_strategy(math.pi / 4, "z")
        assert evaluation.i_terms["01"] == pytest.approx(-0.25)
        assert evaluation.i_terms["10"] == pytest.approx(-0.25)

    def test_anticorrelated_x_strategy_loses(self):
        # M_B = -X flips the superposed-source correlator
        dist = quantum_strategy(math.pi / 4, LocalObservable("X"), LocalObservable.parse("-X"))
        assert winning_probability(dist).p_win == pytest.approx(0.375)

    def test_unknown_strategy(self):
        with pytest.raises(InvalidParameterError):
            evaluate_strategy(math.pi / 4, "y")

    def test_strategy_note(self):
        note = evaluate_strategy(math.pi / 8, "x").strategy_note
        assert note["M_A"] == "X"
        assert note["M_B"] == "X"


class TestIdentity:
    @pytest.mark.parametrize("theta", MEASURED_ANGLES)
    def test_holds_for_quantum_strategies(self, theta):
        for strategy in ("x", "z"):
            assert evaluate_strategy(theta, strategy).identity_holds

    def test_holds_for_random_distributions(self, rng):
        for _ in range(100):
            dist = random_distribution(rng)
            evaluation = winning_probability(dist)
            assert evaluation.identity_holds
            assert classical_identity_check(dist) is True
            assert evaluation.p_win == pytest.approx(0.5 + (evaluation.i_terms["00"] + evaluation.i_terms["11"]) / 4)

    def test_non_uniform_11_row_is_flagged(self, rng):
        dist = random_distribution(rng)
        assert not winning_probability(dist).uniform_11_row

    def test_uniform_distribution(self):
        dist = JointDistribution.uniform()
        assert winning_probability(dist).p_win == pytest.approx(0.5)
        assert coherence_term(dist, 0, 0) == pytest.approx(0.0)
        np.testing.assert_allclose(dist.row(1, 1), UNIFORM_ROW)


class TestFromCorrelators:
    @pytest.mark.parametrize("theta", MEASURED_ANGLES)
    def test_matches_distribution(self, theta):
        p_win, std_err = winning_probability_from_correlators(math.sin(2 * theta), 0.0, 0.0)
        assert p_win == pytest.approx(evaluate_strategy(theta, "x").p_win)
        assert std_err == 0.0

    def test_z_correlators(self):
        p_win, _ = winning_probability_from_correlators(-1.0, -1.0, -1.0)
        assert p_win == pytest.approx(0.625)

    def test_error_propagation(self):
        _, std_err = winning_probability_from_correlators(0.5, 0.0, 0.0, std_errs=(0.03, 0.04, 0.0))
        assert std_err == pytest.approx(0.05 / 8)


class TestGameProperties:
    thetas = [float(t) for t in np.linspace(0.01, math.pi / 2 - 0.01, 100)]

    def test_x_strategy_over_dense_grid(self):
        for theta in self.thetas:
            evaluation = evaluate_strategy(theta, "x")
            assert evaluation.p_win == pytest.approx(0.5 + math.sin(2 * theta) / 8, abs=1e-12)
            assert evaluation.identity_holds
            assert evaluation.uniform_11_row

    def test_z_strategy_over_dense_grid(self):
        for theta in self.thetas:
            evaluation = evaluate_strategy(theta, "z")
            assert evaluation.p_win == pytest.approx(0.625, abs=1e-12)
            assert evaluation.i_terms["00"] + evaluation.i_terms["11"] == pytest.approx(0.5, abs=1e-12)
            assert evaluation.identity_holds

    @pytest.mark.parametrize("strategy", ["x", "z"])
    def test_coherence_terms_sum_to_zero(self, strategy):
        for theta in self.thetas:
            assert sum(evaluate_strategy(theta, strategy).i_terms.values()) == pytest.approx(0.0, abs=1e-12)

    def test_coherence_terms_sum_to_zero_for_random_distributions(self, rng):
        for _ in range(100):
            i_terms = winning_probability(random_distribution(rng)).i_terms
            assert sum(i_terms.values()) == pytest.approx(0.0, abs=1e-12)
