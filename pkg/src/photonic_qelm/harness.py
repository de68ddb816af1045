"""Training-set-size sweeps, configuration sampling and configuration search.

Seed contract: every random draw comes from a stream keyed by
``(master_seed, stage, repetition[, grid index])`` through
:class:`numpy.random.SeedSequence` spawn keys.  Draws for individual states are
taken from their repetition's stream in state-index order, so results do not
depend on how repetitions are scheduled across threads.
"""
import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import __version__, kernels
from .estimator import DEFAULT_RCOND, TrainingSet, predict, train
from .optics import CoinParams
from .quantum import expectations_batch, haar_random_state, haar_random_states, pauli_observables
from .reservoir import ConfigurationError, WalkConfig, build_walk, effective_povm, two_step_walk, pure_state_probabilities
from .reservoir import reservoir_map, sigma_min
from .sampling import FeatureMode, FeatureVector, SamplingMode, features_batch, sample_counts_batch

log = logging.getLogger(__name__)

STAGE_POOL = 1
STAGE_COUNTS = 2
STAGE_RESAMPLE = 3
STAGE_SPLIT = 4
STAGE_RECORDS = 5
STAGE_SIMULATE = 6

TWO_PI = 2 * math.pi


def substream(seed, *key):
    """Independent generator for ``(seed, key...)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


@dataclass(frozen=True)
class ExperimentConfig:
    walk: WalkConfig
    n_train_grid: tuple = (2, 3, 4, 5, 10, 20, 50, 100)
    pool_size: int = 450
    test_size: int = 150
    repetitions: int = 500
    shots: float = 1e4
    sampling: SamplingMode = SamplingMode.POISSON
    features: FeatureMode = FeatureMode.RAW_RATE
    intercept: bool = True
    master_seed: int = 0
    observables: tuple = ("sigma_x", "sigma_y", "sigma_z")
    fixed_records: bool = False
    rcond: float = DEFAULT_RCOND
    ridge: float = 0.0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_train_grid)
        object.__setattr__(self, "n_train_grid", grid)
        object.__setattr__(self, "observables", tuple(self.observables))
        sampling = SamplingMode(self.sampling)
        shots = float(self.shots)
        if sampling is SamplingMode.EXACT or math.isinf(shots):
            sampling, shots = SamplingMode.EXACT, math.inf
        feats = FeatureMode(self.features)
        if sampling is SamplingMode.EXACT and feats is FeatureMode.RAW_RATE:
            feats = FeatureMode.EXACT
        if sampling is not SamplingMode.EXACT and feats is FeatureMode.EXACT:
            raise ConfigurationError("exact features need infinite shots")
        object.__setattr__(self, "sampling", sampling)
        object.__setattr__(self, "shots", shots)
        object.__setattr__(self, "features", feats)
        if not grid:
            raise ConfigurationError("n_train grid is empty")
        if min(grid) < 1:
            raise ConfigurationError("every n_train must be at least 1")
        if self.test_size < 1:
            raise ConfigurationError("test_size must be at least 1")
        if max(grid) + self.test_size > self.pool_size:
            raise ConfigurationError(
                f"max n_train ({max(grid)}) + test_size ({self.test_size}) exceeds pool_size ({self.pool_size})"
            )
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")
        if not shots > 0:
            raise ConfigurationError("shots must be positive")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")
        if self.ridge < 0:
            raise ConfigurationError("ridge must be nonnegative")
        pauli_observables(self.observables)

    def to_dict(self):
        return {
            "walk": walk_to_dict(self.walk),
            "n_train_grid": list(self.n_train_grid),
            "pool_size": self.pool_size,
            "test_size": self.test_size,
            "repetitions": self.repetitions,
            "shots": "inf" if math.isinf(self.shots) else self.shots,
            "sampling": self.sampling.value,
            "features": self.features.value,
            "intercept": self.intercept,
            "master_seed": int(self.master_seed),
            "observables": list(self.observables),
            "fixed_records": self.fixed_records,
            "rcond": self.rcond,
            "ridge": self.ridge,
        }


def walk_to_dict(walk):
    steps = []
    for s in walk.steps:
        step = {"qplate": {"alpha": s.qplate.alpha, "delta": s.qplate.delta}}
        if s.coin is not None:
            step["coin"] = {"zeta": s.coin.zeta, "theta": s.coin.theta, "phi": s.coin.phi}
        steps.append(step)
    pol = walk.projection_pol
    return {
        "cutoff": walk.oam.cutoff_N,
        "steps": steps,
        "projection": [[pol.amp_L.real, pol.amp_L.imag], [pol.amp_R.real, pol.amp_R.imag]],
    }


def summarize(table):
    """Median, quartiles and population std over repetitions (axis 0)."""
    q1, med, q3 = np.percentile(table, [25, 50, 75], axis=0)
    return {"median_mse": med, "q1": q1, "q3": q3, "std": np.std(table, axis=0)}


def _fmt(x):
    return repr(float(x))


@dataclass
class SweepResults:
    config: ExperimentConfig
    table: np.ndarray  # (repetitions, len(grid), observables)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.stats = summarize(self.table)

    @property
    def n_train_grid(self):
        return self.config.n_train_grid

    @property
    def observables(self):
        return self.config.observables

    def cell(self, n_train, observable):
        gi = self.n_train_grid.index(n_train)
        j = self.observables.index(observable)
        return {k: float(v[gi, j]) for k, v in self.stats.items()}

    def medians(self, n_train):
        gi = self.n_train_grid.index(n_train)
        return self.stats["median_mse"][gi]

    def summary_rows(self):
        rows = []
        for gi, n in enumerate(self.n_train_grid):
            for j, obs in enumerate(self.observables):
                rows.append(
                    {
                        "n_train": n,
                        "observable": obs,
                        "median_mse": float(self.stats["median_mse"][gi, j]),
                        "q1": float(self.stats["q1"][gi, j]),
                        "q3": float(self.stats["q3"][gi, j]),
                        "std": float(self.stats["std"][gi, j]),
                    }
                )
        return rows

    def summary_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_train", "observable", "median_mse", "q1", "q3", "std"])
        for r in self.summary_rows():
            w.writerow([r["n_train"], r["observable"], _fmt(r["median_mse"]), _fmt(r["q1"]), _fmt(r["q3"]), _fmt(r["std"])])
        return buf.getvalue()

    def repetitions_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["repetition", "n_train", "observable", "mse"])
        for r in range(self.table.shape[0]):
            for gi, n in enumerate(self.n_train_grid):
                for j, obs in enumerate(self.observables):
                    w.writerow([r, n, obs, _fmt(self.table[r, gi, j])])
        return buf.getvalue()

    def metadata_json(self):
        return json.dumps(self.metadata, indent=2, sort_keys=True)


def table_from_csv(text):
    """Rebuild the (repetitions, grid, observables) table from :meth:`SweepResults.repetitions_csv`."""
    rows = list(csv.DictReader(io.StringIO(text)))
    reps = sorted({int(r["repetition"]) for r in rows})
    grid = list(dict.fromkeys(int(r["n_train"]) for r in rows))
    obs = list(dict.fromkeys(r["observable"] for r in rows))
    table = np.empty((len(reps), len(grid), len(obs)))
    for r in rows:
        table[int(r["repetition"]), grid.index(int(r["n_train"])), obs.index(r["observable"])] = float(r["mse"])
    return table, grid, obs


class _Pool(NamedTuple):
    probs: np.ndarray
    targets: np.ndarray


def _make_pool(cfg):
    a = reservoir_map(build_walk(cfg.walk))
    states = haar_random_states(substream(cfg.master_seed, STAGE_POOL), cfg.pool_size)
    probs = pure_state_probabilities(a, states)
    targets = np.ascontiguousarray(expectations_batch(states, pauli_observables(cfg.observables)))
    return _Pool(probs, targets)


def _record_features(cfg, probs, counts_rng, resample_rng):
    """Features for one measurement record of the whole pool: ``(F, keep, counts)``.

    ``counts`` is None under exact statistics.
    """
    if cfg.sampling is SamplingMode.EXACT:
        F, bad = features_batch(probs, 1.0, cfg.features, cfg.intercept)
        return F, ~bad, None
    counts = sample_counts_batch(probs, cfg.shots, cfg.sampling, counts_rng)
    F, bad = features_batch(counts, cfg.shots, cfg.features, cfg.intercept)
    if bad.any():
        idx = np.flatnonzero(bad)
        counts[idx] = sample_counts_batch(probs[idx], cfg.shots, cfg.sampling, resample_rng)
        F, bad = features_batch(counts, cfg.shots, cfg.features, cfg.intercept)
        if bad.any():
            log.warning("dropping %d state(s) with zero detected counts after resampling", int(bad.sum()))
    return F, ~bad, counts


def _run_repetition(cfg, pool, r, fixed):
    if fixed is not None:
        F, keep, _ = fixed
    else:
        F, keep, _ = _record_features(
            cfg, pool.probs, substream(cfg.master_seed, STAGE_COUNTS, r), substream(cfg.master_seed, STAGE_RESAMPLE, r)
        )
    usable = np.flatnonzero(keep)
    out = np.empty((len(cfg.n_train_grid), len(cfg.observables)))
    for gi in range(len(cfg.n_train_grid)):
        train_idx, test_idx = split_indices(cfg, r, gi, usable)
        out[gi] = kernels.fit_predict_mse(F, pool.targets, train_idx, test_idx, cfg.rcond, cfg.ridge)
    return out, int(len(keep) - len(usable))


def split_indices(cfg, r, gi, usable):
    """Disjoint (train, test) pool indices for repetition ``r`` and grid entry ``gi``."""
    n = cfg.n_train_grid[gi]
    need = n + cfg.test_size
    if need > len(usable):
        raise ConfigurationError(f"only {len(usable)} usable states remain, {need} needed")
    pick = usable[substream(cfg.master_seed, STAGE_SPLIT, r, gi).permutation(len(usable))[:need]]
    return pick[:n], pick[n:]


def run_sweep(cfg, threads=1):
    pool = _make_pool(cfg)
    fixed = None
    if cfg.fixed_records:
        fixed = _record_features(
            cfg, pool.probs, substream(cfg.master_seed, STAGE_RECORDS), substream(cfg.master_seed, STAGE_RECORDS, 1)
        )
    reps = range(cfg.repetitions)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            outs = list(ex.map(lambda r: _run_repetition(cfg, pool, r, fixed), reps))
    else:
        outs = [_run_repetition(cfg, pool, r, fixed) for r in reps]
    table = np.stack([o[0] for o in outs])
    metadata = {
        "artifact_version": __version__,
        "config": cfg.to_dict(),
        "state_distribution": "haar",
        "statistics": {"quantiles": "linear interpolation", "std_ddof": 0},
        "pool_semantics": "per-repetition disjoint draw of n_train + test_size states from one pool",
        "dropped_states": [o[1] for o in outs],
    }
    return SweepResults(cfg, table, metadata)


@dataclass(frozen=True)
class CoinBounds:
    zeta: tuple = (0.0, TWO_PI)
    theta: tuple = (0.0, TWO_PI)
    phi: tuple = (0.0, TWO_PI)

    def __post_init__(self):
        for name in ("zeta", "theta", "phi"):
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"invalid bounds for {name}: {(lo, hi)}")


def random_config(rng, bounds=None):
    """Two-step walk with uniformly drawn coin angles and a Haar-random projection."""
    b = bounds or CoinBounds()
    coin = CoinParams(float(rng.uniform(*b.zeta)), float(rng.uniform(*b.theta)), float(rng.uniform(*b.phi)))
    return two_step_walk(coin, haar_random_state(rng))


class OptimizationResult(NamedTuple):
    config: WalkConfig
    score: float
    criterion: str
    evaluated: int


@dataclass(frozen=True)
class ValidationSettings:
    """Protocol behind the validation-MSE criterion."""

    shots: float = 1e4
    sampling: SamplingMode = SamplingMode.POISSON
    features: FeatureMode = FeatureMode.RAW_RATE
    intercept: bool = True
    n_train: int = 100
    test_size: int = 150
    repetitions: int = 5
    observables: tuple = ("sigma_x", "sigma_y", "sigma_z")


def validation_mse(walk, settings, seed):
    """Median over repetitions of the observable-averaged test MSE."""
    cfg = ExperimentConfig(
        walk=walk,
        n_train_grid=(settings.n_train,),
        pool_size=settings.n_train + settings.test_size,
        test_size=settings.test_size,
        repetitions=settings.repetitions,
        shots=settings.shots,
        sampling=settings.sampling,
        features=settings.features,
        intercept=settings.intercept,
        master_seed=seed,
        observables=settings.observables,
    )
    res = run_sweep(cfg)
    return float(np.median(res.table[:, 0, :].mean(axis=1)))


def optimize_config(budget, rng, criterion="sigma_min", bounds=None, validation=None):
    """Random search over coin angles and projection polarization.

    ``sigma_min`` maximizes the smallest frame singular value; ``val_mse``
    minimizes :func:`validation_mse`, with every candidate scored on the same
    validation seed.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if criterion not in ("sigma_min", "val_mse"):
        raise ValueError(f"unknown criterion {criterion!r}")
    validation = validation or ValidationSettings()
    val_seed = int(rng.integers(0, 2**63)) if criterion == "val_mse" else None
    best = None
    for _ in range(budget):
        cand = random_config(rng, bounds)
        if criterion == "sigma_min":
            score = sigma_min(effective_povm(reservoir_map(build_walk(cand))))
            better = best is None or score > best[1]
        else:
            score = validation_mse(cand, validation, val_seed)
            better = best is None or score < best[1]
        if better:
            best = (cand, score)
    return OptimizationResult(best[0], float(best[1]), criterion, budget)



def simulate_state(cfg, psi, weights=None, n_train=None):
    """Run one input state through reservoir, sampling and readout.

    Without ``weights`` a readout is first trained on ``n_train`` Haar states
    (default: the largest grid value) measured with the configured statistics.
    """
    a = reservoir_map(build_walk(cfg.walk))
    obs = pauli_observables(cfg.observables)
    if weights is None:
        n_train = n_train or max(cfg.n_train_grid)
        states = haar_random_states(substream(cfg.master_seed, STAGE_SIMULATE, 0), n_train)
        F, keep, _ = _record_features(
            cfg,
            pure_state_probabilities(a, states),
            substream(cfg.master_seed, STAGE_SIMULATE, 1),
            substream(cfg.master_seed, STAGE_SIMULATE, 2),
        )
        T = expectations_batch(states, obs)
        weights = train(
            TrainingSet(F[keep], T[keep], cfg.features, cfg.intercept, cfg.observables), cfg.rcond, cfg.ridge
        )
    p = pure_state_probabilities(a, psi.vector)
    out = {
        "state": [[psi.amp_L.real, psi.amp_L.imag], [psi.amp_R.real, psi.amp_R.imag]],
        "outcomes": [int(n) for n in cfg.walk.oam.n_values],
        "probabilities": p[0].tolist(),
    }
    F, keep, counts = _record_features(
        cfg, p, substream(cfg.master_seed, STAGE_SIMULATE, 3), substream(cfg.master_seed, STAGE_SIMULATE, 4)
    )
    if counts is not None:
        out["counts"] = counts[0].tolist()
    if not keep[0]:
        raise ValueError("no counts detected for this state; features undefined")
    f = FeatureVector(F[0], cfg.features, cfg.intercept)
    pred = predict(weights, f)
    truth = expectations_batch(psi.vector[None, :], obs)[0]
    out.update(
        features=F[0].tolist(),
        observables=list(cfg.observables),
        prediction=pred.tolist(),
        truth=truth.tolist(),
        squared_error=((pred - truth) ** 2).tolist(),
    )
    return out
