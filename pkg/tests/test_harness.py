import logging

import numpy as np
import pytest

from photonic_qelm.harness import (
    CoinBounds,
    ExperimentConfig,
    ValidationSettings,
    optimize_config,
    random_config,
    run_sweep,
    simulate_state,
    split_indices,
    summarize,
    table_from_csv,
    validation_mse,
)
from photonic_qelm.estimator import EstimatorWeights
from photonic_qelm.quantum import PolarizationState, haar_random_state
from photonic_qelm.reservoir import ConfigurationError, build_walk, effective_povm, frame_rank, reservoir_map, sigma_min


def small(walk, **kw):
    base = dict(walk=walk, n_train_grid=(2, 5, 10, 50), pool_size=250, test_size=100, repetitions=8, master_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def povm_of(walk):
    return effective_povm(reservoir_map(build_walk(walk)))


class TestExperimentConfig:
    def test_pool_too_small(self, generic_walk):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(generic_walk, n_train_grid=(100,), pool_size=200, test_size=150)

    @pytest.mark.parametrize("kw", [{"repetitions": 0}, {"n_train_grid": ()}, {"n_train_grid": (0,)}, {"shots": -1}])
    def test_invalid(self, generic_walk, kw):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(generic_walk, **kw)

    def test_infinite_shots_mean_exact(self, generic_walk):
        cfg = ExperimentConfig(generic_walk, shots=np.inf)
        assert cfg.sampling.value == "exact" and cfg.features.value == "exact"

    def test_exact_features_need_infinite_shots(self, generic_walk):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(generic_walk, features="exact")

    def test_unknown_observable(self, generic_walk):
        with pytest.raises(ValueError):
            ExperimentConfig(generic_walk, observables=("sigma_q",))


class TestSweep:
    def test_exact_statistics_recover_perfectly(self, generic_walk):
        cfg = small(generic_walk, n_train_grid=tuple(range(4, 21)) + (50,), shots=np.inf, repetitions=10)
        res = run_sweep(cfg)
        for n in cfg.n_train_grid:
            if n >= 5:
                assert np.all(res.medians(n) < 1e-18)

    def test_reproducible_across_threads(self, good_walk):
        cfg = small(good_walk, repetitions=6)
        a = run_sweep(cfg, threads=1)
        b = run_sweep(cfg, threads=4)
        assert a.summary_csv() == b.summary_csv()
        assert a.repetitions_csv() == b.repetitions_csv()

    def test_single_repetition_bitwise(self, good_walk):
        cfg = small(good_walk, repetitions=1, master_seed=99)
        np.testing.assert_array_equal(run_sweep(cfg).table, run_sweep(cfg, threads=3).table)

    def test_seed_changes_results(self, good_walk):
        a = run_sweep(small(good_walk, master_seed=1)).table
        b = run_sweep(small(good_walk, master_seed=2)).table
        assert not np.array_equal(a, b)

    def test_quartiles_ordered_and_nonnegative(self, good_walk):
        res = run_sweep(small(good_walk, shots=1e3))
        assert np.all(res.table >= 0)
        assert np.all(res.stats["q1"] <= res.stats["median_mse"])
        assert np.all(res.stats["median_mse"] <= res.stats["q3"])

    def test_more_training_helps(self, good_walk):
        cfg = small(good_walk, n_train_grid=(10, 100), repetitions=30, pool_size=250, test_size=150)
        res = run_sweep(cfg)
        assert np.all(res.medians(100) <= res.medians(10))

    def test_csv_round_trip_reproduces_summary(self, good_walk):
        res = run_sweep(small(good_walk))
        table, grid, obs = table_from_csv(res.repetitions_csv())
        assert tuple(grid) == res.n_train_grid and tuple(obs) == res.observables
        np.testing.assert_array_equal(table, res.table)
        again = summarize(table)
        for k in res.stats:
            np.testing.assert_array_equal(again[k], res.stats[k])

    def test_summary_csv_layout(self, good_walk):
        res = run_sweep(small(good_walk))
        lines = res.summary_csv().splitlines()
        assert lines[0] == "n_train,observable,median_mse,q1,q3,std"
        assert len(lines) == 1 + 4 * 3

    def test_fixed_records_share_features(self, good_walk):
        # one record set for all repetitions: only the splits vary
        fixed = run_sweep(small(good_walk, fixed_records=True))
        fresh = run_sweep(small(good_walk))
        assert fixed.table.shape == (8, 4, 3)
        assert not np.array_equal(fixed.table, fresh.table)
        assert fixed.metadata["config"]["fixed_records"] is True

    def test_metadata(self, good_walk):
        md = run_sweep(small(good_walk)).metadata
        assert md["state_distribution"] == "haar"
        assert md["statistics"]["std_ddof"] == 0
        assert md["dropped_states"] == [0] * 8

    def test_conditional_drops_empty_records(self, good_walk, caplog):
        # two shots per state leave many records empty even after one resample
        cfg = small(good_walk, shots=0.3, features="conditional", n_train_grid=(2,), pool_size=250, test_size=20)
        with caplog.at_level(logging.WARNING):
            res = run_sweep(cfg)
        assert sum(res.metadata["dropped_states"]) > 0
        assert "dropping" in caplog.text

    def test_multinomial_sweep(self, good_walk):
        res = run_sweep(small(good_walk, sampling="multinomial", features="conditional"))
        assert np.all(np.isfinite(res.table))


class TestSplits:
    def test_disjoint_and_sized(self, generic_walk):
        cfg = small(generic_walk)
        usable = np.arange(cfg.pool_size)
        for r in range(cfg.repetitions):
            for gi, n in enumerate(cfg.n_train_grid):
                tr, te = split_indices(cfg, r, gi, usable)
                assert len(tr) == n and len(te) == cfg.test_size
                assert not set(tr) & set(te)

    def test_too_few_usable(self, generic_walk):
        cfg = small(generic_walk)
        with pytest.raises(ConfigurationError):
            split_indices(cfg, 0, 3, np.arange(60))


class TestRandomConfig:
    def test_within_bounds(self, rng):
        b = CoinBounds((0.1, 0.2), (1.0, 1.5), (3.0, 3.0))
        for _ in range(100):
            coin = random_config(rng, b).steps[1].coin
            assert 0.1 <= coin.zeta <= 0.2 and 1.0 <= coin.theta <= 1.5 and coin.phi == 3.0

    def test_single_coin_between_qplates(self, rng):
        w = random_config(rng)
        assert w.steps[0].coin is None and w.steps[1].coin is not None

    def test_same_seed_same_config(self):
        a = random_config(np.random.default_rng(5))
        b = random_config(np.random.default_rng(5))
        assert a == b

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            CoinBounds((1.0, 0.0))

    def test_almost_always_informationally_complete(self):
        rng = np.random.default_rng(17)
        full = sum(frame_rank(povm_of(random_config(rng))).rank == 4 for _ in range(1000))
        assert full >= 990


class TestOptimize:
    def test_sigma_min_beats_most_random_configs(self):
        res = optimize_config(500, np.random.default_rng(0))
        assert frame_rank(povm_of(res.config)).rank == 4
        rng = np.random.default_rng(123)
        fresh = np.array([sigma_min(povm_of(random_config(rng))) for _ in range(1000)])
        assert np.mean(fresh <= res.score) >= 0.95

    def test_budget_one_is_a_single_draw(self):
        res = optimize_config(1, np.random.default_rng(9))
        assert res.config == random_config(np.random.default_rng(9))
        assert res.evaluated == 1

    def test_bad_arguments(self, rng):
        with pytest.raises(ValueError):
            optimize_config(0, rng)
        with pytest.raises(ValueError):
            optimize_config(1, rng, criterion="fastest")

    def test_val_mse_scores_candidates(self):
        settings = ValidationSettings(n_train=20, test_size=30, repetitions=2)
        res = optimize_config(4, np.random.default_rng(1), criterion="val_mse", validation=settings)
        assert res.criterion == "val_mse"
        assert res.score > 0

    def test_validation_mse_is_deterministic(self, good_walk):
        s = ValidationSettings(n_train=20, test_size=30, repetitions=3)
        assert validation_mse(good_walk, s, 4) == validation_mse(good_walk, s, 4)


class TestSimulateState:
    def test_exact_run_is_accurate(self, generic_walk, rng):
        cfg = ExperimentConfig(generic_walk, n_train_grid=(20,), shots=np.inf)
        out = simulate_state(cfg, haar_random_state(rng))
        assert max(out["squared_error"]) < 1e-18
        assert "counts" not in out
        assert out["outcomes"] == [-2, -1, 0, 1, 2]

    def test_sampled_run_reports_counts(self, good_walk):
        cfg = ExperimentConfig(good_walk, n_train_grid=(50,), shots=1e4)
        out = simulate_state(cfg, PolarizationState(1, 0))
        assert len(out["counts"]) == 5
        assert out["truth"] == pytest.approx([0, 0, 1])
        assert max(out["squared_error"]) < 0.05

    def test_given_weights(self, generic_walk, rng):
        cfg = ExperimentConfig(generic_walk, n_train_grid=(20,), shots=np.inf, intercept=False)
        w = EstimatorWeights(np.zeros((3, 5)), "exact", False)
        out = simulate_state(cfg, haar_random_state(rng), weights=w)
        assert out["prediction"] == [0, 0, 0]
