import numpy as np
import pytest

from shortcut_forge.models import landau_zener, random_hermitian
from shortcut_forge.operators import pauli_matrix

SX = pauli_matrix("X")
SY = pauli_matrix("Y")
SZ = pauli_matrix("Z")
ID2 = np.eye(2, dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def lz():
    """Unit-time Landau-Zener sweep, lambda: -5 -> 5, delta = 1."""
    return landau_zener(delta=1.0, lam_start=-5.0, lam_stop=5.0, duration=1.0)


def lz_cd_oracle(lam: float, rate: float, delta: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Closed-form two-level counterdiabatic operator from the Bloch-angle
    eigenbasis: -(hbar delta rate / (2 (lam^2 + delta^2))) sigma_y."""
    return -hbar * delta * rate / (2 * (lam**2 + delta**2)) * SY


def two_level_eigvecs(lam: float, delta: float = 1.0):
    """Symbolic eigenbasis of lam sz + delta sx via the Bloch angle."""
    theta = np.arctan2(delta, lam)
    ground = np.array([-np.sin(theta / 2), np.cos(theta / 2)], dtype=complex)
    excited = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    return ground, excited


def random_hermitian_pair(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    return random_hermitian(dim, rng), random_hermitian(dim, rng)


def discrete_berry_phase(vectors: np.ndarray) -> float:
    """Gauge-invariant discrete line-integral Berry phase of a closed loop of
    states vectors[i] (first and last should coincide up to phase)."""
    total = 1.0 + 0.0j
    for i in range(len(vectors) - 1):
        total *= np.vdot(vectors[i], vectors[i + 1])
    total *= np.vdot(vectors[-1], vectors[0])
    return float(-np.angle(total))
