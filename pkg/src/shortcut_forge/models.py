"""Concrete driven systems used by the demos, the scenario runner, and tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import as_hermitian, pauli_matrix
from .schedule import Schedule

SX = pauli_matrix("X")
SY = pauli_matrix("Y")
SZ = pauli_matrix("Z")


@dataclass
class DrivenSystem:
    """A Hamiltonian family H(lambda) pulled along a schedule lambda(t)."""

    H_terms: list[np.ndarray]        # H(lam) = H0 + sum_i lam_i * H_terms[i]
    H0: np.ndarray
    schedule: Schedule
    name: str = "driven-system"

    def __post_init__(self):
        as_hermitian(self.H0)
        for Hi in self.H_terms:
            as_hermitian(Hi)

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    @property
    def duration(self) -> float:
        return self.schedule.duration

    def H_of_lambda(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_1d(lam)
        H = self.H0.copy()
        for li, Hi in zip(lam, self.H_terms):
            H = H + li * Hi
        return H

    def dH_dlambda(self, lam: np.ndarray, i: int = 0) -> np.ndarray:
        return self.H_terms[i]

    def hamiltonian(self, t: float) -> np.ndarray:
        return self.H_of_lambda(self.schedule(t))

    def dhamiltonian(self, t: float) -> np.ndarray:
        rate = self.schedule.rate(t)
        dH = np.zeros_like(self.H0)
        for ri, Hi in zip(rate, self.H_terms):
            dH = dH + ri * Hi
        return dH


def landau_zener(
    delta: float = 1.0,
    lam_start: float = -5.0,
    lam_stop: float = 5.0,
    duration: float = 1.0,
    shape: str = "linear",
) -> DrivenSystem:
    """Two-level avoided crossing H = lambda(t) sz + delta sx.

    The gap is 2 sqrt(lambda^2 + delta^2), minimal (2 delta) at lambda = 0.
    """
    maker = Schedule.linear if shape == "linear" else Schedule.smoothstep
    sched = maker(lam_start, lam_stop, duration)
    return DrivenSystem(H_terms=[SZ], H0=delta * SX, schedule=sched, name="landau_zener")


def _site_operator(op: str, i: int, n: int) -> np.ndarray:
    label = "".join(op if j == i else "I" for j in range(n))
    return pauli_matrix(label)


def tfim_chain(
    n_sites: int = 4,
    coupling: float = 1.0,
    field: float = 1.0,
    duration: float = 1.0,
    lam_start: float = 0.0,
    lam_stop: float = 1.0,
    shape: str = "smoothstep",
) -> DrivenSystem:
    """Open transverse-field Ising chain interpolating field -> coupling.

    H(lambda) = -lambda J sum_i sz_i sz_{i+1} - (1 - lambda) h sum_i sx_i.
    """
    if not 2 <= n_sites <= 10:
        raise ValueError("n_sites must be between 2 and 10")
    Hzz = np.zeros((2**n_sites, 2**n_sites), dtype=complex)
    for i in range(n_sites - 1):
        Hzz = Hzz + _site_operator("Z", i, n_sites) @ _site_operator("Z", i + 1, n_sites)
    Hx = np.zeros_like(Hzz)
    for i in range(n_sites):
        Hx = Hx + _site_operator("X", i, n_sites)
    maker = Schedule.linear if shape == "linear" else Schedule.smoothstep
    sched = maker(lam_start, lam_stop, duration)
    # H(lam) = -h Hx + lam * (h Hx - J Hzz)
    return DrivenSystem(
        H_terms=[field * Hx - coupling * Hzz], H0=-field * Hx, schedule=sched, name="tfim_chain"
    )


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """GUE-style Hermitian matrix with O(1) entries."""
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (A + A.conj().T) / 2


def random_hermitian_ramp(
    dim: int, seed: int, duration: float = 1.0, shape: str = "smoothstep"
) -> DrivenSystem:
    """Seeded random two-term ramp H(lambda) = H0 + lambda H1, lambda: 0 -> 1."""
    rng = np.random.default_rng(seed)
    H0 = random_hermitian(dim, rng)
    H1 = random_hermitian(dim, rng)
    maker = Schedule.linear if shape == "linear" else Schedule.smoothstep
    sched = maker(0.0, 1.0, duration)
    return DrivenSystem(H_terms=[H1], H0=H0, schedule=sched, name=f"random_hermitian[{dim},{seed}]")


@dataclass
class GaussianWidthRamp:
    """Normalized Gaussian amplitude whose width follows a quintic ramp.

    The scaling phase theta = m wdot x^2 / (2 hbar w) solves the continuity
    equation exactly, making this the standard oracle for the 1-D
    fast-forward construction.
    """

    width_start: float = 1.0
    width_stop: float = 2.0
    duration: float = 4.0
    mass: float = 1.0

    def width(self, t: float) -> float:
        u = np.clip(t / self.duration, 0.0, 1.0)
        p = u**3 * (10 - 15 * u + 6 * u**2)
        return self.width_start + (self.width_stop - self.width_start) * p

    def width_rate(self, t: float) -> float:
        u = np.clip(t / self.duration, 0.0, 1.0)
        dp = 30 * u**2 * (1 - u) ** 2 / self.duration
        return (self.width_stop - self.width_start) * dp

    def amplitude(self, x: np.ndarray, t: float) -> np.ndarray:
        w = self.width(t)
        return (np.pi * w**2) ** -0.25 * np.exp(-(x**2) / (2 * w**2))

    def theta_exact(self, x: np.ndarray, t: float, hbar: float = 1.0) -> np.ndarray:
        w, wd = self.width(t), self.width_rate(t)
        return self.mass * wd * x**2 / (2 * hbar * w)
