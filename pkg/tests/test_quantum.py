import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonic_qelm.quantum import (
    DensityMatrix,
    Observable,
    PolarizationState,
    PrepParams,
    density,
    expectation,
    expectations_batch,
    fidelity,
    haar_random_state,
    haar_random_states,
    input_state,
    pauli,
    pauli_observables,
)

angles = st.floats(-20, 20, allow_nan=False, allow_infinity=False)
S2 = 1 / np.sqrt(2)


class TestPauli:
    def test_sigma_z(self):
        np.testing.assert_array_equal(pauli("sigma_z").matrix, np.diag([1, -1]))

    def test_sigma_x(self):
        np.testing.assert_array_equal(pauli("sigma_x").matrix, [[0, 1], [1, 0]])

    def test_sigma_y(self):
        np.testing.assert_array_equal(pauli("sigma_y").matrix, [[0, -1j], [1j, 0]])

    @pytest.mark.parametrize("label", ["sigma_w", "custom", "", None])
    def test_unknown_label(self, label):
        with pytest.raises(ValueError):
            pauli(label)

    def test_observable_must_be_hermitian(self):
        with pytest.raises(ValueError):
            Observable.custom([[0, 1], [0, 0]])


class TestInputState:
    def test_zero_angles_give_diagonal(self):
        psi = input_state(PrepParams(0, 0))
        np.testing.assert_allclose(psi.vector, [S2, S2], atol=1e-15)

    def test_eighth_wave_gives_R(self):
        psi = input_state(PrepParams(np.pi / 8, 0))
        assert fidelity(psi, PolarizationState(0, 1)) == pytest.approx(1, abs=1e-15)

    def test_quarter_turn(self):
        psi = input_state(PrepParams(np.pi / 4, 0))
        np.testing.assert_allclose(psi.vector, [-S2, S2], atol=1e-15)

    def test_amplitudes_follow_waveplate_formula(self):
        z, t = 0.37, -1.2
        psi = input_state(PrepParams(z, t))
        x = 2 * z - t
        expected = np.array(
            [np.exp(1j * t) * (np.cos(x) - np.sin(x)), np.exp(-1j * t) * (np.cos(x) + np.sin(x))]
        ) / np.sqrt(2)
        np.testing.assert_allclose(psi.vector, expected, atol=1e-15)

    def test_norm_over_many_random_angles(self, rng):
        for z, t in rng.uniform(-10, 10, size=(10_000, 2)):
            assert abs(input_state(PrepParams(z, t)).norm - 1) < 1e-12

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            input_state(PrepParams(np.nan, 0))


class TestDensity:
    def test_L(self):
        np.testing.assert_array_equal(density(PolarizationState(1, 0)).entries, np.diag([1, 0]))

    def test_diagonal(self):
        np.testing.assert_allclose(density(PolarizationState(S2, S2)).entries, np.full((2, 2), 0.5), atol=1e-15)

    def test_circular_superposition(self):
        rho = density(PolarizationState(S2, 1j * S2)).entries
        np.testing.assert_allclose(rho, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            density(PolarizationState(1, 1e-4))

    def test_density_matrix_validation(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.0, 0.5]))
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))

    @given(angles, angles)
    def test_idempotent(self, z, t):
        rho = density(input_state(PrepParams(z, t))).entries
        assert np.max(np.abs(rho @ rho - rho)) < 1e-12


class TestExpectation:
    def test_sigma_z_on_L(self):
        assert expectation(pauli("sigma_z"), density(PolarizationState(1, 0))) == 1

    def test_sigma_x_on_diagonal(self):
        assert expectation(pauli("sigma_x"), density(PolarizationState(S2, S2))) == pytest.approx(1, abs=1e-15)

    def test_sigma_y_on_mixed(self):
        assert expectation(pauli("sigma_y"), DensityMatrix.maximally_mixed()) == 0

    @given(angles, angles)
    def test_pauli_range(self, z, t):
        rho = density(input_state(PrepParams(z, t)))
        for P in pauli_observables():
            assert -1 - 1e-12 <= expectation(P, rho) <= 1 + 1e-12

    def test_batch_matches_single(self, rng):
        states = haar_random_states(rng, 10)
        obs = pauli_observables()
        batch = expectations_batch(states, obs)
        for k, v in enumerate(states):
            rho = density(PolarizationState.from_vector(v))
            np.testing.assert_allclose(batch[k], [expectation(o, rho) for o in obs], atol=1e-14)


class TestHaar:
    def test_normalized(self, rng):
        for _ in range(100):
            assert abs(haar_random_state(rng).norm - 1) < 1e-12

    def test_first_moment(self):
        # E[|psi><psi|] = I/2 for the Haar measure
        states = haar_random_states(np.random.default_rng(5), 100_000)
        mean_rho = np.einsum("ni,nj->ij", states, states.conj()) / len(states)
        assert np.max(np.abs(mean_rho - np.eye(2) / 2)) < 0.01
        sz = expectations_batch(states, [pauli("sigma_z")])[:, 0]
        assert abs(sz.mean()) < 0.01

    def test_orthogonal(self, rng):
        psi = haar_random_state(rng)
        assert fidelity(psi, psi.orthogonal()) < 1e-30
