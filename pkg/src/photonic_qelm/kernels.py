"""Backend selection for the hot kernels.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or ``PHOTONIC_QELM_PURE_PYTHON`` is set to a non-empty
value other than ``0``.  Both expose:

``lstsq_minnorm(F, T, rcond, ridge) -> (X, singular_values, rank)``
    minimum-norm least squares ``F @ X ~ T`` (LAPACK gelsd semantics).
``fit_predict_mse(F, T, train, test, rcond, ridge) -> mse``
    fit on ``train`` rows, per-column MSE on ``test`` rows.
``outcome_probabilities(A, psi) -> P``
    ``|A psi_i|^2`` for a batch of pure states.
"""
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

__all__ = ["BACKEND", "backend", "available_backends", "lstsq_minnorm", "fit_predict_mse", "outcome_probabilities"]


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def backend(name):
    """Return the kernel module called ``name`` ('compiled' or 'python')."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    flag = os.environ.get("PHOTONIC_QELM_PURE_PYTHON", "")
    if _compiled is None or (flag and flag != "0"):
        return "python"
    return "compiled"


BACKEND = _select()
_impl = backend(BACKEND)


def lstsq_minnorm(F, T, rcond=1e-10, ridge=0.0):
    return _impl.lstsq_minnorm(
        np.ascontiguousarray(F, dtype=np.float64), np.ascontiguousarray(T, dtype=np.float64), rcond, ridge
    )


def fit_predict_mse(F, T, train, test, rcond=1e-10, ridge=0.0):
    return _impl.fit_predict_mse(
        F, T, np.ascontiguousarray(train, dtype=np.intp), np.ascontiguousarray(test, dtype=np.intp), rcond, ridge
    )


def outcome_probabilities(A, psi):
    return _impl.outcome_probabilities(
        np.ascontiguousarray(A, dtype=np.complex128), np.ascontiguousarray(psi, dtype=np.complex128)
    )
