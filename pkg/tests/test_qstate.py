import math

import numpy as np
import pytest

from conftest import MEASURED_ANGLES, random_density, random_state
from coherence.errors import DimensionMismatchError, InvalidParameterError
from coherence.qstate import (
    MAX_QUBITS,
    DensityOperator,
    StateVector,
    basis_state,
    density_from_state,
    dicke_one_excitation,
    epr_family,
    fidelity,
    ghz_state,
    psd_sqrt,
    visibility_for_fidelity,
    weight_one_label,
    werner_fidelity,
    werner_mix,
)


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidParameterError):
            StateVector(1, np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            StateVector(2, np.array([1.0, 0.0]))

    def test_qubit_limit(self):
        with pytest.raises(InvalidParameterError):
            ghz_state(MAX_QUBITS + 1)

    def test_from_amplitudes_normalizes(self):
        psi = StateVector.from_amplitudes([3.0, 4.0], normalize=True)
        np.testing.assert_allclose(psi.amplitudes, [0.6, 0.8])

    def test_amplitudes_are_read_only(self):
        psi = basis_state("01")
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1.0


class TestConstructors:
    def test_basis_state_is_big_endian(self):
        assert basis_state("01").amplitudes[1] == 1.0
        assert basis_state("10").amplitudes[2] == 1.0

    @pytest.mark.parametrize("theta", MEASURED_ANGLES)
    def test_epr_family_amplitudes(self, theta):
        psi = epr_family(theta, "00")
        np.testing.assert_allclose(psi.amplitudes, [0, math.cos(theta), math.sin(theta), 0], atol=1e-15)

    def test_epr_family_product_labels(self):
        np.testing.assert_allclose(epr_family(0.3, "01").amplitudes, [0, 1, 0, 0])
        np.testing.assert_allclose(epr_family(0.3, "10").amplitudes, [0, 0, 1, 0])

    @pytest.mark.parametrize("theta", [0.0, math.pi / 2, -0.1, 2.0])
    def test_epr_family_theta_range(self, theta):
        with pytest.raises(InvalidParameterError):
            epr_family(theta, "00")

    def test_epr_family_unknown_label(self):
        with pytest.raises(InvalidParameterError):
            epr_family(0.3, "11")

    def test_ghz(self):
        psi = ghz_state(3)
        assert psi.amplitudes[0] == pytest.approx(1 / math.sqrt(2))
        assert psi.amplitudes[7] == pytest.approx(1 / math.sqrt(2))

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_dicke_support(self, n):
        psi = dicke_one_excitation(n)
        support = {format(i, f"0{n}b") for i in np.flatnonzero(np.abs(psi.amplitudes) > 0)}
        assert support == {weight_one_label(n, p) for p in range(n)}

    def test_werner_endpoints(self):
        psi = epr_family(math.pi / 4, "00")
        np.testing.assert_allclose(werner_mix(psi, 1.0).matrix, density_from_state(psi).matrix)
        np.testing.assert_allclose(werner_mix(psi, 0.0).matrix, np.eye(4) / 4)

    def test_werner_rejects_bad_visibility(self):
        with pytest.raises(InvalidParameterError):
            werner_mix(basis_state("00"), 1.2)


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidParameterError):
            DensityOperator(1, np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidParameterError):
            DensityOperator(1, np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_purity(self):
        assert density_from_state(ghz_state(3)).is_pure()
        assert not werner_mix(ghz_state(3), 0.5).is_pure()


class TestFidelity:
    def test_werner_fidelity_closed_form(self):
        psi = epr_family(math.pi / 4, "00")
        assert werner_fidelity(0.99) == pytest.approx(0.996243, abs=1e-6)
        assert werner_fidelity(0.98) == pytest.approx(0.992472, abs=1e-6)
        assert fidelity(werner_mix(psi, 0.99), density_from_state(psi)) == pytest.approx(0.996243, abs=1e-6)
        assert fidelity(werner_mix(psi, 0.98), density_from_state(psi)) == pytest.approx(0.992472, abs=1e-6)

    def test_visibility_round_trip(self):
        assert visibility_for_fidelity(werner_fidelity(0.97)) == pytest.approx(0.97)

    def test_visibility_for_unreachable_fidelity(self):
        with pytest.raises(InvalidParameterError):
            visibility_for_fidelity(0.4)

    def test_identical_states(self, rng):
        for _ in range(20):
            rho = random_density(rng, 2)
            assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_and_bounded(self, rng):
        for _ in range(100):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            f = fidelity(rho, sigma)
            assert 0.0 <= f <= 1.0
            assert f == pytest.approx(fidelity(sigma, rho), abs=1e-8)

    def test_pure_shortcut_matches_general_path(self, rng):
        psi = random_state(rng, 2)
        sigma = random_density(rng, 2)
        root, _ = psd_sqrt(sigma.matrix)
        expected = math.sqrt(np.real(np.vdot(psi.amplitudes, sigma.matrix @ psi.amplitudes)))
        assert fidelity(density_from_state(psi), sigma) == pytest.approx(expected, abs=1e-10)
        np.testing.assert_allclose(root @ root, sigma.matrix, atol=1e-10)

    def test_orthogonal_states(self):
        assert fidelity(density_from_state(basis_state("01")), density_from_state(basis_state("10"))) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fidelity(density_from_state(basis_state("0")), density_from_state(basis_state("00")))


class TestStateProperties:
    def test_epr_family_is_kronecker_superposition(self):
        ket_01 = np.kron([1.0, 0.0], [0.0, 1.0])
        ket_10 = np.kron([0.0, 1.0], [1.0, 0.0])
        for theta in np.linspace(0.05, math.pi / 2 - 0.05, 20):
            expected = math.cos(theta) * ket_01 + math.sin(theta) * ket_10
            np.testing.assert_allclose(epr_family(theta, "00").amplitudes, expected, atol=1e-15)

    def test_unit_norm(self, rng):
        for theta in rng.uniform(1e-6, math.pi / 2 - 1e-6, size=100):
            for label in ("00", "01", "10"):
                assert np.linalg.norm(epr_family(theta, label).amplitudes) == pytest.approx(1.0, abs=1e-12)
        for n in range(2, 8):
            assert np.linalg.norm(ghz_state(n).amplitudes) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(dicke_one_excitation(n).amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_two_qubit_dicke_is_balanced_epr(self):
        np.testing.assert_allclose(
            dicke_one_excitation(2).amplitudes, epr_family(math.pi / 4, "00").amplitudes, atol=1e-15
        )
