"""Coin and q-plate operators on the polarization (x) OAM space.

Joint kets are laid out polarization-major:
``|L,-N>, ..., |L,N>, |R,-N>, ..., |R,N>``.
"""
from dataclasses import dataclass

import numpy as np

L, R = 0, 1


@dataclass(frozen=True)
class CoinParams:
    zeta: float
    theta: float
    phi: float

    @property
    def eta(self):
        return self.zeta + self.phi - 2 * self.theta


@dataclass(frozen=True)
class QPlateParams:
    """Optic-axis orientation ``alpha`` and phase retardance ``delta`` (radians)."""

    alpha: float
    delta: float


@dataclass(frozen=True)
class OAMSpace:
    cutoff_N: int

    def __post_init__(self):
        if int(self.cutoff_N) != self.cutoff_N or self.cutoff_N < 0:
            raise ValueError(f"OAM cutoff must be a nonnegative integer, got {self.cutoff_N!r}")

    @property
    def dim(self):
        return 2 * self.cutoff_N + 1

    @property
    def n_values(self):
        return np.arange(-self.cutoff_N, self.cutoff_N + 1)

    def index(self, pol, n):
        """Row of ``|pol, n>`` in the joint basis."""
        if abs(n) > self.cutoff_N:
            raise IndexError(f"OAM index {n} outside |n| <= {self.cutoff_N}")
        return pol * self.dim + n + self.cutoff_N

    def ket(self, pol, n):
        v = np.zeros(2 * self.dim, dtype=complex)
        v[self.index(pol, n)] = 1
        return v


@dataclass(frozen=True)
class JointOperator:
    matrix: np.ndarray
    space: OAMSpace

    def __post_init__(self):
        size = 2 * self.space.dim
        if self.matrix.shape != (size, size):
            raise ValueError(f"joint operator must be {size}x{size}, got {self.matrix.shape}")

    def __matmul__(self, other):
        if isinstance(other, JointOperator):
            if other.space != self.space:
                raise ValueError("operators act on different OAM spaces")
            return JointOperator(self.matrix @ other.matrix, self.space)
        return self.matrix @ other


def coin_operator(p):
    eta = p.eta
    c, s = np.cos(eta), np.sin(eta)
    return np.array(
        [
            [np.exp(-1j * (p.zeta - p.phi)) * c, np.exp(1j * (p.zeta + p.phi)) * s],
            [-np.exp(-1j * (p.zeta + p.phi)) * s, np.exp(1j * (p.zeta - p.phi)) * c],
        ]
    )


def coin_on_joint(coin, space):
    """Lift a 2x2 coin to ``coin (x) I_OAM``."""
    return JointOperator(np.kron(coin, np.eye(space.dim)), space)


def qplate_operator(p, space):
    """Conditional shift of a q-plate, truncated to the ``|n| <= N`` window.

    ``|L,n> -> cos(d/2)|L,n> + i sin(d/2) e^{-2i a} |R,n+1>`` and
    ``|R,n> -> cos(d/2)|R,n> + i sin(d/2) e^{+2i a} |L,n-1>``; transitions
    leaving the window are dropped, so edge kets lose norm.
    """
    dim = space.dim
    N = space.cutoff_N
    c = np.cos(p.delta / 2)
    s = np.sin(p.delta / 2)
    up = 1j * s * np.exp(2j * p.alpha)  # <L,n| S |R,n+1>
    down = 1j * s * np.exp(-2j * p.alpha)  # <R,n| S |L,n-1>
    S = np.zeros((2 * dim, 2 * dim), dtype=complex)
    idx = np.arange(dim)
    S[idx, idx] = c
    S[dim + idx, dim + idx] = c
    inner = np.arange(dim - 1)
    S[inner, dim + inner + 1] = up
    S[dim + inner + 1, inner] = down
    return JointOperator(S, space)


def interior_projector(space):
    """Projector onto joint kets with ``|n| <= N - 1``."""
    keep = np.abs(space.n_values) <= space.cutoff_N - 1
    return np.diag(np.concatenate([keep, keep]).astype(complex))
