"""Qubit primitives for the polarization degree of freedom.

All 2x2 matrices are written in the ordered circular basis ``(|L>, |R>)``;
``sigma_z = |L><L| - |R><R|``.  The abstract coin basis ``|up>, |down>`` of a
coined walk is identified with ``|L>, |R>``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# Hermitian operator basis (I, X, Y, Z) used for frame coordinates.
PAULI_BASIS = np.stack([IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z])


class ObservableLabel(str, Enum):
    SIGMA_X = "sigma_x"
    SIGMA_Y = "sigma_y"
    SIGMA_Z = "sigma_z"
    CUSTOM = "custom"


_PAULI_MATRICES = {
    ObservableLabel.SIGMA_X: SIGMA_X,
    ObservableLabel.SIGMA_Y: SIGMA_Y,
    ObservableLabel.SIGMA_Z: SIGMA_Z,
}


@dataclass(frozen=True)
class PolarizationState:
    """Pure polarization qubit ``amp_L |L> + amp_R |R>``.

    Construction does not enforce normalization so that raw amplitudes can be
    carried around; :func:`density` rejects anything off by more than 1e-9.
    """

    amp_L: complex
    amp_R: complex

    def __post_init__(self):
        object.__setattr__(self, "amp_L", complex(self.amp_L))
        object.__setattr__(self, "amp_R", complex(self.amp_R))

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=complex).reshape(2)
        return cls(complex(v[0]), complex(v[1]))

    @property
    def vector(self):
        return np.array([self.amp_L, self.amp_R], dtype=complex)

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    def normalized(self):
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return PolarizationState(self.amp_L / n, self.amp_R / n)

    def orthogonal(self):
        """The state orthogonal to this one (up to global phase)."""
        return PolarizationState(-np.conj(self.amp_R), np.conj(self.amp_L))


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > HERMITIAN_TOL:
            raise ValueError(f"density matrix trace is {np.trace(m).real!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -HERMITIAN_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", m)

    @classmethod
    def maximally_mixed(cls):
        return cls(IDENTITY / 2)

    def bloch_vector(self):
        return np.array([np.trace(self.entries @ P).real for P in PAULI_BASIS[1:]])


@dataclass(frozen=True)
class Observable:
    label: ObservableLabel
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"observable must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("observable is not Hermitian")
        object.__setattr__(self, "label", ObservableLabel(self.label))
        object.__setattr__(self, "matrix", m)

    @classmethod
    def custom(cls, matrix):
        return cls(ObservableLabel.CUSTOM, matrix)

    @property
    def name(self):
        return self.label.value

    def pauli_coordinates(self):
        """``(tr O, tr O sx, tr O sy, tr O sz)``, real for Hermitian ``O``."""
        return np.einsum("ij,kji->k", self.matrix, PAULI_BASIS).real


@dataclass(frozen=True)
class PrepParams:
    """Half-wave plate angle ``zeta1`` and quarter-wave plate angle ``theta1`` (radians)."""

    zeta1: float
    theta1: float


def pauli(label):
    try:
        label = ObservableLabel(label)
        matrix = _PAULI_MATRICES[label]
    except (ValueError, KeyError):
        raise ValueError(f"unknown Pauli label {label!r}") from None
    return Observable(label, matrix.copy())


def pauli_observables(labels=("sigma_x", "sigma_y", "sigma_z")):
    return [pauli(lbl) for lbl in labels]


def input_state(p):
    """Polarization state prepared by HWP(zeta1) followed by QWP(theta1)."""
    if not (np.isfinite(p.zeta1) and np.isfinite(p.theta1)):
        raise ValueError("preparation angles must be finite")
    x = 2 * p.zeta1 - p.theta1
    c, s = np.cos(x), np.sin(x)
    amp_L = np.exp(1j * p.theta1) * (c - s) / np.sqrt(2)
    amp_R = np.exp(-1j * p.theta1) * (c + s) / np.sqrt(2)
    return PolarizationState(complex(amp_L), complex(amp_R)).normalized()


def density(psi):
    n = psi.norm
    if abs(n - 1) > NORM_TOL:
        raise ValueError(f"state norm {n!r} deviates from 1")
    v = psi.vector / n
    return DensityMatrix(np.outer(v, v.conj()))


def expectation(obs, rho):
    return float(np.trace(obs.matrix @ rho.entries).real)


def fidelity(psi, phi):
    """``|<psi|phi>|^2``; insensitive to global phase."""
    return float(abs(np.vdot(psi.vector, phi.vector)) ** 2)


def haar_random_states(rng, n):
    """``n`` Haar-random qubit states as rows of an (n, 2) complex array."""
    z = rng.standard_normal((n, 4))
    v = z[:, 0::2] + 1j * z[:, 1::2]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def haar_random_state(rng):
    return PolarizationState.from_vector(haar_random_states(rng, 1)[0])


def expectations_batch(states, observables):
    """``<psi_k| O_j |psi_k>`` for state rows and observables; shape (n, m)."""
    states = np.asarray(states, dtype=complex)
    mats = np.stack([o.matrix for o in observables])
    return np.einsum("ni,jik,nk->nj", states.conj(), mats, states).real
