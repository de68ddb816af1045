"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled with
``PHOTONIC_QELM_PURE_PYTHON=1``.
"""
import numpy as np


def _system(F, T, rows, ridge):
    A = F[rows]
    B = T[rows]
    if ridge > 0:
        d = F.shape[1]
        A = np.vstack([A, np.sqrt(ridge) * np.eye(d)])
        B = np.vstack([B, np.zeros((d, T.shape[1]))])
    return A, B


def lstsq_minnorm(F, T, rcond=1e-10, ridge=0.0):
    F = np.ascontiguousarray(F, dtype=np.float64)
    T = np.ascontiguousarray(T, dtype=np.float64)
    if F.shape[0] != T.shape[0]:
        raise ValueError("feature and target row counts differ")
    A, B = _system(F, T, np.arange(F.shape[0]), ridge)
    X, _, rank, s = np.linalg.lstsq(A, B, rcond=rcond)
    return np.ascontiguousarray(X), s, int(rank)


def fit_predict_mse(F, T, train, test, rcond=1e-10, ridge=0.0):
    if len(train) < 1 or len(test) < 1:
        raise ValueError("train and test index sets must be non-empty")
    A, B = _system(F, T, train, ridge)
    X = np.linalg.lstsq(A, B, rcond=rcond)[0]
    err = F[test] @ X - T[test]
    return np.mean(err * err, axis=0)


def outcome_probabilities(A, psi):
    A = np.asarray(A, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape[1] != A.shape[1]:
        raise ValueError("state dimension does not match the reservoir map")
    amp = psi @ A.T
    return amp.real**2 + amp.imag**2
