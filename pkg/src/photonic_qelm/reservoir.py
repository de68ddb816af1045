"""Quantum-walk reservoir, its Kraus map onto the OAM register and the effective POVM."""
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .optics import CoinParams, JointOperator, OAMSpace, QPlateParams, coin_on_joint, coin_operator, qplate_operator
from .quantum import PAULI_BASIS, DensityMatrix, PolarizationState

ISOMETRY_TOL = 1e-9
POVM_TOL = 1e-12
FRAME_RTOL = 1e-10

# Fabrication values of the two q-plates and their operating retardances.
QPLATE1_ALPHA = float(np.deg2rad(105.0))
QPLATE2_ALPHA = float(np.deg2rad(336.0))
QPLATE1_DELTA = np.pi / 2
QPLATE2_DELTA = np.pi


class ConfigurationError(ValueError):
    """A walk or experiment configuration violates its invariants."""


@dataclass(frozen=True)
class WalkStep:
    """One walk step: optional coin followed by a q-plate."""

    qplate: QPlateParams
    coin: Optional[CoinParams] = None


@dataclass(frozen=True)
class WalkConfig:
    steps: tuple
    projection_pol: PolarizationState
    oam: Optional[OAMSpace] = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.oam is None:
            object.__setattr__(self, "oam", OAMSpace(len(self.steps)))
        if len(self.steps) > self.oam.cutoff_N:
            raise ConfigurationError(
                f"{len(self.steps)} q-plates need an OAM cutoff of at least {len(self.steps)}, got {self.oam.cutoff_N}"
            )
        if abs(self.projection_pol.norm - 1) > ISOMETRY_TOL:
            raise ConfigurationError("projection polarization must be normalized")

    @property
    def num_outcomes(self):
        return self.oam.dim


def two_step_walk(coin, projection_pol, cutoff=None):
    """Two-step walk S(a2, pi) C S(a1, pi/2) with the hardware q-plate values."""
    steps = (
        WalkStep(QPlateParams(QPLATE1_ALPHA, QPLATE1_DELTA)),
        WalkStep(QPlateParams(QPLATE2_ALPHA, QPLATE2_DELTA), coin),
    )
    oam = None if cutoff is None else OAMSpace(cutoff)
    return WalkConfig(steps, projection_pol, oam)


@dataclass(frozen=True)
class WalkUnitary:
    matrix: np.ndarray
    config: WalkConfig = field(repr=False)

    @property
    def space(self):
        return self.config.oam


@dataclass(frozen=True)
class ReservoirMap:
    """Kraus operator ``A`` (outcomes x 2) of the post-selected walk."""

    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[1] != 2:
            raise ValueError(f"reservoir map must have 2 columns, got shape {A.shape}")
        object.__setattr__(self, "A", A)

    @property
    def num_outcomes(self):
        return self.A.shape[0]

    def apply(self, psi):
        v = psi.vector if isinstance(psi, PolarizationState) else np.asarray(psi, dtype=complex)
        return self.A @ v


@dataclass(frozen=True)
class EffectivePOVM:
    """Effective measurement on the input qubit, one 2x2 element per outcome."""

    elements: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        E = np.asarray(self.elements, dtype=complex)
        if E.ndim != 3 or E.shape[1:] != (2, 2):
            raise ValueError(f"POVM elements must have shape (k, 2, 2), got {E.shape}")
        if np.max(np.abs(E - np.conj(np.swapaxes(E, 1, 2))), initial=0.0) > POVM_TOL:
            raise ValueError("POVM elements must be Hermitian")
        if len(E) and np.linalg.eigvalsh(E).min() < -POVM_TOL:
            raise ValueError("POVM elements must be positive semidefinite")
        if len(E) and np.linalg.eigvalsh(E.sum(axis=0)).max() > 1 + POVM_TOL:
            raise ValueError("POVM elements sum to more than the identity")
        object.__setattr__(self, "elements", E)
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(len(E))))

    def __len__(self):
        return len(self.elements)

    def total(self):
        return self.elements.sum(axis=0)


class FrameRank(NamedTuple):
    rank: int
    singular_values: np.ndarray


def build_walk(cfg):
    space = cfg.oam
    U = JointOperator(np.eye(2 * space.dim, dtype=complex), space)
    for step in cfg.steps:
        if step.coin is not None:
            U = coin_on_joint(coin_operator(step.coin), space) @ U
        U = qplate_operator(step.qplate, space) @ U
    cols = [space.index(pol, 0) for pol in (0, 1)]
    norms = np.linalg.norm(U.matrix[:, cols], axis=0)
    loss = np.max(np.abs(norms - 1))
    if loss > ISOMETRY_TOL:
        raise ConfigurationError(
            f"walk loses norm {loss:.3g} on the reachable subspace; the q-plate count exceeds the OAM window"
        )
    return WalkUnitary(U.matrix, cfg)


def reservoir_map(u, psi_pol=None):
    """``A = (<psi_pol| (x) I) U (I (x) |0>)``."""
    if psi_pol is None:
        psi_pol = u.config.projection_pol
    if abs(psi_pol.norm - 1) > ISOMETRY_TOL:
        raise ValueError("projection polarization must be normalized")
    space = u.space
    dim = space.dim
    cols = [space.index(pol, 0) for pol in (0, 1)]
    blocks = u.matrix[:, cols].reshape(2, dim, 2)
    A = np.tensordot(psi_pol.vector.conj(), blocks, axes=(0, 0))
    return ReservoirMap(A)


def effective_povm(a, labels=None):
    # element b is A^dag |b><b| A = conj(a_b)^T a_b for row a_b
    E = np.einsum("bi,bj->bij", a.A.conj(), a.A)
    if labels is None:
        labels = tuple(range(-(a.num_outcomes // 2), a.num_outcomes - a.num_outcomes // 2))
    return EffectivePOVM(E, tuple(labels))


def walk_povm(cfg):
    return effective_povm(reservoir_map(build_walk(cfg)), tuple(int(n) for n in cfg.oam.n_values))


def probabilities(povm, rho):
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    p = np.einsum("bij,ji->b", povm.elements, m).real
    if p.min(initial=0.0) < -POVM_TOL:
        raise ValueError("negative outcome probability; invalid state or POVM")
    return np.clip(p, 0.0, None)


def pure_state_probabilities(a, states):
    """Outcome probabilities for a batch of pure states (rows), via the map ``A``."""
    return kernels.outcome_probabilities(a.A, np.atleast_2d(states))


def frame_matrix(povm):
    """Row ``b`` holds ``(tr mu_b, tr mu_b sx, tr mu_b sy, tr mu_b sz)``."""
    return np.einsum("bij,kji->bk", povm.elements, PAULI_BASIS).real


def frame_rank(povm):
    M = frame_matrix(povm)
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return FrameRank(0, s)
    return FrameRank(int(np.sum(s > FRAME_RTOL * s[0])), s)


def sigma_min(povm):
    """Smallest of the four frame singular values (0 when fewer than four outcomes)."""
    s = frame_rank(povm).singular_values
    return float(s[3]) if s.size >= 4 else 0.0
