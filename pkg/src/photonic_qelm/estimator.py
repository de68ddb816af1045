"""Linear readout training, prediction, error metrics and the dual-frame oracle."""
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .quantum import Observable, ObservableLabel
from .reservoir import frame_matrix
from .sampling import FeatureMode, FeatureVector

DEFAULT_RCOND = 1e-10
WEIGHTS_FORMAT = "photonic-qelm-weights/1"


@dataclass(frozen=True)
class TrainingSet:
    features: np.ndarray
    targets: np.ndarray
    mode: FeatureMode = FeatureMode.RAW_RATE
    intercept: bool = True
    observables: tuple = ("sigma_x", "sigma_y", "sigma_z")

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.features, dtype=float))
        T = np.asarray(self.targets, dtype=float)
        if T.ndim == 1:
            T = T[:, None]
        if F.shape[0] != T.shape[0]:
            raise ValueError(f"{F.shape[0]} feature rows but {T.shape[0]} target rows")
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(T))):
            raise ValueError("training data must be finite")
        if len(self.observables) != T.shape[1]:
            raise ValueError("one observable label per target column is required")
        for j, name in enumerate(self.observables):
            if name != ObservableLabel.CUSTOM.value and np.any(np.abs(T[:, j]) > 1 + 1e-12):
                raise ValueError(f"Pauli targets for {name} must lie in [-1, 1]")
        object.__setattr__(self, "features", np.ascontiguousarray(F))
        object.__setattr__(self, "targets", np.ascontiguousarray(T))
        object.__setattr__(self, "mode", FeatureMode(self.mode))
        object.__setattr__(self, "observables", tuple(self.observables))

    def __len__(self):
        return self.features.shape[0]


@dataclass(frozen=True)
class EstimatorWeights:
    """Readout matrix ``W`` (observables x features) plus the metadata needed to apply it."""

    W: np.ndarray
    mode: FeatureMode
    intercept: bool
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    observables: tuple = ("sigma_x", "sigma_y", "sigma_z")
    rcond: float = DEFAULT_RCOND
    ridge: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if not np.all(np.isfinite(W)):
            raise ValueError("weights must be finite")
        if W.shape[0] != len(self.observables):
            raise ValueError("one weight row per observable is required")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "mode", FeatureMode(self.mode))
        object.__setattr__(self, "singular_values", np.asarray(self.singular_values, dtype=float))
        object.__setattr__(self, "observables", tuple(self.observables))

    @property
    def num_features(self):
        return self.W.shape[1]

    def to_dict(self):
        return {
            "format": WEIGHTS_FORMAT,
            "observables": list(self.observables),
            "matrix": self.W.tolist(),
            "feature_mode": self.mode.value,
            "intercept": self.intercept,
            "singular_values": self.singular_values.tolist(),
            "rcond": self.rcond,
            "ridge": self.ridge,
            "extra": self.extra,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != WEIGHTS_FORMAT:
            raise ValueError(f"unsupported weights format {d.get('format')!r}")
        return cls(
            W=np.array(d["matrix"], dtype=float),
            mode=d["feature_mode"],
            intercept=bool(d["intercept"]),
            singular_values=np.array(d["singular_values"], dtype=float),
            observables=tuple(d["observables"]),
            rcond=float(d["rcond"]),
            ridge=float(d["ridge"]),
            extra=dict(d.get("extra", {})),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def train(ts, rcond=DEFAULT_RCOND, ridge=0.0):
    """Minimum-norm least-squares readout; singular values below ``rcond * s_max`` are dropped.

    ``ridge > 0`` adds a Tikhonov penalty ``ridge * ||W||^2``.
    """
    if len(ts) == 0:
        raise ValueError("cannot train on an empty training set")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    X, s, rank = kernels.lstsq_minnorm(ts.features, ts.targets, rcond, ridge)
    return EstimatorWeights(
        W=X.T,
        mode=ts.mode,
        intercept=ts.intercept,
        singular_values=s,
        observables=ts.observables,
        rcond=rcond,
        ridge=ridge,
        extra={"rank": rank, "n_train": len(ts)},
    )


def predict(w, f):
    """``W @ f`` for a :class:`FeatureVector`; no clamping to physical ranges."""
    if FeatureMode(f.mode) is not w.mode:
        raise ValueError(f"weights expect {w.mode.value} features, got {FeatureMode(f.mode).value}")
    if f.intercept != w.intercept or len(f) != w.num_features:
        raise ValueError(
            f"feature layout mismatch: weights take {w.num_features} values (intercept={w.intercept}), "
            f"got {len(f)} (intercept={f.intercept})"
        )
    return w.W @ f.values


def predict_batch(w, F):
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[1] != w.num_features:
        raise ValueError(f"weights take {w.num_features} features, got {F.shape[1]}")
    return F @ w.W.T


def mse(pred, truth):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    if pred.ndim == 1:
        pred, truth = pred[:, None], truth[:, None]
    if pred.shape[0] < 1:
        raise ValueError("mse needs at least one sample")
    return np.mean((pred - truth) ** 2, axis=0)


def ideal_weights(povm, observables, mode=FeatureMode.EXACT, intercept=False):
    """Dual-frame readout solving ``sum_b w_b mu_b = O`` in least squares.

    Coordinates are taken in the (I, sx, sy, sz) basis, where the condition
    reads ``M^T w = (tr O, tr O sx, tr O sy, tr O sz)``.  Observables outside
    the span of the POVM get the best approximation; ``extra['in_span']``
    records which ones are reproduced exactly.  With ``intercept`` a zero
    weight is appended for the constant feature.
    """
    observables = [o if isinstance(o, Observable) else Observable.custom(o) for o in observables]
    M = frame_matrix(povm)
    O = np.stack([o.pauli_coordinates() for o in observables], axis=1)
    X, s, rank = kernels.lstsq_minnorm(M.T.copy(), O, DEFAULT_RCOND)
    W = X.T
    recon = np.einsum("jb,bik->jik", W, povm.elements)
    residual = [float(np.linalg.norm(recon[j] - o.matrix)) for j, o in enumerate(observables)]
    in_span = [r < 1e-10 for r in residual]
    if intercept:
        W = np.hstack([W, np.zeros((W.shape[0], 1))])
    return EstimatorWeights(
        W=W,
        mode=mode,
        intercept=intercept,
        singular_values=s,
        observables=tuple(o.name for o in observables),
        rcond=DEFAULT_RCOND,
        extra={"rank": rank, "in_span": in_span, "residual": residual},
    )
