"""Finite-statistics simulation of detector counts and their conversion to features."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

NEG_TOL = 1e-12


class SamplingMode(str, Enum):
    POISSON = "poisson"
    MULTINOMIAL = "multinomial"
    EXACT = "exact"


class FeatureMode(str, Enum):
    RAW_RATE = "raw"
    CONDITIONAL = "conditional"
    EXACT = "exact"


class DegenerateSampleError(ValueError):
    """A conditional feature was requested for a record with no detected events."""


@dataclass(frozen=True)
class CountVector:
    counts: np.ndarray
    shots_nominal: float

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or np.any(c < 0):
            raise ValueError("counts must be a 1-d nonnegative vector")
        if not self.shots_nominal > 0:
            raise ValueError("nominal shots must be positive")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    mode: FeatureMode
    intercept: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "mode", FeatureMode(self.mode))

    def __len__(self):
        return len(self.values)


def _check_probabilities(p):
    p = np.asarray(p, dtype=float)
    if p.min(initial=0.0) < -NEG_TOL:
        raise ValueError("probabilities must be nonnegative")
    return np.clip(p, 0.0, None)


def _check_shots(shots):
    if not (shots > 0) or not np.isfinite(shots):
        raise ValueError(f"shots must be a positive finite number, got {shots!r}")


def sample_counts_batch(P, shots, mode, rng):
    """Sample one count record per row of the (n, outcomes) probability matrix ``P``.

    Poisson: independent counts with mean ``shots * p_b``.
    Multinomial: ``round(shots)`` events spread with probabilities ``p / sum(p)``.
    """
    P = _check_probabilities(P)
    _check_shots(shots)
    mode = SamplingMode(mode)
    if mode is SamplingMode.POISSON:
        return rng.poisson(shots * P)
    if mode is SamplingMode.MULTINOMIAL:
        total = P.sum(axis=-1, keepdims=True)
        q = np.divide(P, total, out=np.zeros_like(P), where=total > 0)
        n = np.where(total[..., 0] > 0, int(round(shots)), 0)
        return rng.multinomial(n, q)
    raise ValueError("exact mode does not sample counts")


def sample_counts(p, shots, mode, rng):
    p = _check_probabilities(p)
    counts = sample_counts_batch(p[None, :], shots, mode, rng)[0]
    return CountVector(counts, float(shots))


def features_batch(counts, shots, mode, with_intercept):
    """Feature matrix for count (or probability) rows.

    Returns ``(F, degenerate)`` where ``degenerate`` flags rows with zero total
    count under conditional mode (their feature rows are left at zero).
    """
    mode = FeatureMode(mode)
    X = np.asarray(counts, dtype=float)
    degenerate = np.zeros(len(X), dtype=bool)
    if mode is FeatureMode.RAW_RATE:
        F = X / shots
    elif mode is FeatureMode.CONDITIONAL:
        total = X.sum(axis=1, keepdims=True)
        degenerate = total[:, 0] == 0
        F = np.divide(X, total, out=np.zeros_like(X), where=total > 0)
    else:
        F = X.copy()
    if with_intercept:
        F = np.hstack([F, np.ones((len(F), 1))])
    return np.ascontiguousarray(F), degenerate


def features(c, mode, with_intercept=False):
    """Feature vector from a :class:`CountVector` (raw/conditional) or exact probabilities."""
    mode = FeatureMode(mode)
    if mode is FeatureMode.EXACT:
        if isinstance(c, CountVector):
            raise ValueError("exact features take probabilities, not counts")
        values = _check_probabilities(c)
    else:
        if not isinstance(c, CountVector):
            raise ValueError(f"{mode.value} features require a CountVector")
        if mode is FeatureMode.RAW_RATE:
            values = c.counts / c.shots_nominal
        else:
            if c.total == 0:
                raise DegenerateSampleError("conditional features undefined for an all-zero count record")
            values = c.counts / c.total
    if with_intercept:
        values = np.append(values, 1.0)
    return FeatureVector(values, mode, with_intercept)
