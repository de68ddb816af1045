import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_probabilities, joint_norm
from photonic_qelm.harness import random_config
from photonic_qelm.optics import CoinParams, OAMSpace, QPlateParams
from photonic_qelm.quantum import (
    DensityMatrix,
    PolarizationState,
    PrepParams,
    density,
    haar_random_state,
    haar_random_states,
    input_state,
)
from photonic_qelm.reservoir import (
    QPLATE1_ALPHA,
    QPLATE2_ALPHA,
    ConfigurationError,
    EffectivePOVM,
    WalkConfig,
    WalkStep,
    build_walk,
    effective_povm,
    frame_matrix,
    frame_rank,
    two_step_walk,
    probabilities,
    pure_state_probabilities,
    reservoir_map,
    walk_povm,
)

angle = st.floats(0, 2 * np.pi, allow_nan=False)


def test_qplate_constants():
    assert QPLATE1_ALPHA == pytest.approx(105 * np.pi / 180)
    assert QPLATE2_ALPHA == pytest.approx(336 * np.pi / 180)


class TestBuildWalk:
    def test_two_step_walk_is_isometric_on_reachable_subspace(self, generic_walk):
        U = build_walk(generic_walk)
        sp = generic_walk.oam
        for pol in (0, 1):
            assert abs(np.linalg.norm(U.matrix @ sp.ket(pol, 0)) - 1) < 1e-12

    def test_empty_walk_is_identity(self):
        cfg = WalkConfig((), PolarizationState(1, 0), OAMSpace(0))
        np.testing.assert_array_equal(build_walk(cfg).matrix, np.eye(2))

    def test_single_full_qplate(self):
        cfg = WalkConfig((WalkStep(QPlateParams(0, np.pi), CoinParams(0, 0, 0)),), PolarizationState(1, 0), OAMSpace(1))
        U = build_walk(cfg)
        np.testing.assert_allclose(U.matrix @ cfg.oam.ket(0, 0), 1j * cfg.oam.ket(1, 1), atol=1e-15)

    def test_window_too_small_is_rejected(self):
        with pytest.raises(ConfigurationError):
            two_step_walk(CoinParams(0.1, 0.2, 0.3), PolarizationState(1, 0), cutoff=1)

    def test_default_window_equals_qplate_count(self, generic_walk):
        assert generic_walk.oam.cutoff_N == 2

    def test_matches_oracle_on_joint_state(self, generic_walk, rng):
        states = haar_random_states(rng, 20)
        np.testing.assert_allclose(joint_norm(generic_walk, states), 1, atol=1e-12)


class TestReservoirMap:
    def test_shape(self, generic_walk):
        assert reservoir_map(build_walk(generic_walk)).A.shape == (5, 2)

    def test_identity_walk_reduces_to_projection(self, rng):
        pol = haar_random_state(rng)
        cfg = WalkConfig((), pol, OAMSpace(0))
        povm = effective_povm(reservoir_map(build_walk(cfg)))
        for _ in range(10):
            psi = haar_random_state(rng)
            p = probabilities(povm, density(psi))
            assert p.shape == (1,)
            assert p[0] == pytest.approx(abs(np.vdot(pol.vector, psi.vector)) ** 2, abs=1e-14)

    def test_complementary_projections_sum_to_one(self, generic_walk, rng):
        U = build_walk(generic_walk)
        pol = generic_walk.projection_pol
        A = reservoir_map(U, pol)
        A_perp = reservoir_map(U, pol.orthogonal())
        for v in haar_random_states(rng, 50):
            total = np.linalg.norm(A.apply(v)) ** 2 + np.linalg.norm(A_perp.apply(v)) ** 2
            assert total == pytest.approx(1, abs=1e-12)

    def test_rows_match_projected_joint_amplitudes(self, generic_walk, rng):
        A = reservoir_map(build_walk(generic_walk))
        states = haar_random_states(rng, 25)
        np.testing.assert_allclose(
            np.abs(states @ A.A.T) ** 2, brute_probabilities(generic_walk, states), atol=1e-12
        )

    def test_operator_norm_at_most_one(self, rng):
        for _ in range(50):
            A = reservoir_map(build_walk(random_config(rng))).A
            assert np.linalg.norm(A, 2) <= 1 + 1e-12


class TestEffectivePOVM:
    def test_sum_is_AdagA(self, generic_walk):
        a = reservoir_map(build_walk(generic_walk))
        povm = effective_povm(a)
        assert np.max(np.abs(povm.total() - a.A.conj().T @ a.A)) < 1e-12

    def test_elements_rank_one(self, generic_walk):
        povm = walk_povm(generic_walk)
        for el in povm.elements:
            assert np.linalg.matrix_rank(el, tol=1e-12) <= 1

    def test_five_elements_with_oam_labels(self, generic_walk):
        povm = walk_povm(generic_walk)
        assert len(povm) == 5
        assert povm.labels == (-2, -1, 0, 1, 2)

    def test_rejects_non_psd(self):
        with pytest.raises(ValueError):
            EffectivePOVM(np.array([np.diag([1.0, -0.1])]))

    def test_rejects_more_than_identity(self):
        with pytest.raises(ValueError):
            EffectivePOVM(np.array([np.eye(2), np.diag([0.5, 0.0])]))

    @settings(max_examples=50, deadline=None)
    @given(angle, angle, angle, angle, angle)
    def test_invariants_for_random_configs(self, z, t, p, pz, pt):
        cfg = two_step_walk(CoinParams(z, t, p), input_state(PrepParams(pz, pt)))
        a = reservoir_map(build_walk(cfg))
        povm = effective_povm(a)
        assert np.linalg.eigvalsh(povm.elements).min() >= -1e-12
        AdA = a.A.conj().T @ a.A
        assert np.max(np.abs(povm.total() - AdA)) < 1e-12
        ev = np.linalg.eigvalsh(AdA)
        assert ev.min() >= -1e-12 and ev.max() <= 1 + 1e-12
        assert frame_rank(povm).rank <= min(len(povm), 4)


class TestProbabilities:
    def test_mixed_state(self, generic_walk):
        povm = walk_povm(generic_walk)
        p = probabilities(povm, DensityMatrix.maximally_mixed())
        np.testing.assert_allclose(p, np.trace(povm.elements, axis1=1, axis2=2).real / 2, atol=1e-15)

    def test_agree_with_bruteforce_oracle(self, generic_walk, rng):
        povm = walk_povm(generic_walk)
        states = haar_random_states(rng, 100)
        ref = brute_probabilities(generic_walk, states)
        for v, r in zip(states, ref):
            p = probabilities(povm, density(PolarizationState.from_vector(v)))
            assert np.max(np.abs(p - r)) < 1e-12
            assert p.min() >= 0 and p.sum() <= 1 + 1e-12

    def test_batch_kernel_agrees(self, generic_walk, rng):
        a = reservoir_map(build_walk(generic_walk))
        states = haar_random_states(rng, 30)
        np.testing.assert_allclose(pure_state_probabilities(a, states), brute_probabilities(generic_walk, states), atol=1e-12)


class TestFrameRank:
    def test_generic_coin_is_informationally_complete(self, generic_walk):
        fr = frame_rank(walk_povm(generic_walk))
        assert fr.rank == 4
        assert len(fr.singular_values) == 4

    def test_diagonal_coin_loses_a_direction(self):
        # zeta + phi - 2 theta = 0 makes the coin diagonal: the oracle never
        # populates n = +-2 and only three frame rows remain.
        cfg = two_step_walk(CoinParams(0.3, 0.7, 1.1), input_state(PrepParams(0.2, 0.5)))
        states = haar_random_states(np.random.default_rng(1), 50)
        ref = brute_probabilities(cfg, states)
        assert np.max(ref[:, [0, 4]]) < 1e-30
        assert frame_rank(walk_povm(cfg)).rank == 3

    def test_identity_walk_rank_one(self):
        cfg = WalkConfig((), PolarizationState(1, 0), OAMSpace(0))
        assert frame_rank(walk_povm(cfg)).rank == 1

    def test_duplicates_do_not_change_rank(self, generic_walk):
        povm = walk_povm(generic_walk)
        doubled = EffectivePOVM(np.concatenate([povm.elements, povm.elements]) / 2)
        assert frame_rank(doubled).rank == frame_rank(povm).rank
        single = EffectivePOVM(povm.elements[1:2])
        assert frame_rank(EffectivePOVM(np.concatenate([single.elements] * 2) / 2)).rank == frame_rank(single).rank

    def test_frame_rows_are_pauli_components(self):
        povm = EffectivePOVM(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
        np.testing.assert_allclose(frame_matrix(povm), [[1, 0, 0, 1], [1, 0, 0, -1]])
