"""Dynamical invariants, Lewis-Riesenfeld phases, Hamiltonian decomposition in
an invariant basis, and algebra-closed inverse engineering.

Mode paths use the same layout as EigenPath: modes[i, :, n] is the n-th
orthonormal eigenvector of the invariant at grid[i], in a smooth gauge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from .errors import GaugeDiscontinuityError
from .operators import OperatorBasis, commutator, frobenius_inner, frobenius_norm
from .spectral import _align_frames


@dataclass
class DynamicalInvariant:
    """Hermitian F(t) with conserved spectrum obeying the von Neumann equation."""

    grid: np.ndarray
    operators: np.ndarray          # (n_t, D, D)
    eigenvalues: np.ndarray        # (n_t, D), continuity-tracked
    vectors: np.ndarray            # (n_t, D, D) smooth-gauge modes

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def eigenvalue_drift(self) -> float:
        """Max relative drift of any tracked eigenvalue across the grid."""
        ev = self.eigenvalues
        spread = max(np.abs(ev).max(), 1e-300)
        return float(np.abs(ev - ev[0]).max() / spread)

    @classmethod
    def from_modes(cls, grid: np.ndarray, modes: np.ndarray, fbar: np.ndarray | None = None):
        """Build F(t) = sum_n fbar_n |phi_n(t)><phi_n(t)| from mode paths.

        The free eigenvalues default to 0..D-1: any time-independent values
        work, distinct ones keep the eigenvectors well-defined.
        """
        modes = np.asarray(modes, dtype=complex)
        D = modes.shape[1]
        if fbar is None:
            fbar = np.arange(D, dtype=float)
        fbar = np.asarray(fbar, dtype=float)
        ops = np.einsum("n,tin,tjn->tij", fbar, modes, modes.conj())
        ev = np.tile(fbar, (len(grid), 1))
        return cls(grid=np.asarray(grid, float), operators=ops, eigenvalues=ev, vectors=modes)

    @classmethod
    def from_operator(cls, grid: np.ndarray, F_of_t: Callable[[float], np.ndarray]):
        """Diagonalize a supplied F(t) on the grid with smooth-gauge tracking."""
        grid = np.asarray(grid, dtype=float)
        ops, evs, vecs = [], [], []
        prev = None
        for t in grid:
            F = np.asarray(F_of_t(t), dtype=complex)
            E, V = np.linalg.eigh(F)
            if prev is not None:
                E, V, _ = _align_frames(prev, E, V)
            ops.append(F)
            evs.append(E)
            vecs.append(V)
            prev = V
        return cls(grid=grid, operators=np.array(ops), eigenvalues=np.array(evs), vectors=np.array(vecs))


def invariant_residual(
    H_of_t: Callable[[float], np.ndarray],
    F: DynamicalInvariant | Callable[[float], np.ndarray],
    grid: np.ndarray | None = None,
    hbar: float | None = None,
) -> np.ndarray:
    """Per-time von Neumann defect ||i hbar dF/dt - [H, F]|| (Frobenius norm).

    dF/dt is taken by centered differences on the grid (one-sided at the
    ends), so the grid must resolve the invariant's motion.
    """
    hb = config.hbar(hbar)
    if isinstance(F, DynamicalInvariant):
        grid = F.grid
        ops = F.operators
    else:
        if grid is None:
            raise ValueError("grid required when F is a callable")
        grid = np.asarray(grid, dtype=float)
        ops = np.array([np.asarray(F(t), dtype=complex) for t in grid])
    if len(grid) < 3:
        raise ValueError("need at least 3 grid points for centered differences")
    dF = np.gradient(ops, grid, axis=0, edge_order=2)
    out = np.empty(len(grid))
    for i, t in enumerate(grid):
        H = np.asarray(H_of_t(t), dtype=complex)
        out[i] = frobenius_norm(1j * hb * dF[i] - commutator(H, ops[i]))
    return out


def _check_mode_continuity(modes: np.ndarray, overlap_min: float = 0.9) -> None:
    ov = np.abs(np.einsum("tin,tin->tn", modes[:-1].conj(), modes[1:]))
    if ov.min() < overlap_min:
        i, n = np.argwhere(ov < overlap_min)[0]
        raise GaugeDiscontinuityError(
            f"mode {n} overlap {ov[i, n]:.3f} < {overlap_min} between grid points {i} and {i + 1}"
        )


def lr_phase(
    H_of_t: Callable[[float], np.ndarray],
    phi: np.ndarray,
    grid: np.ndarray,
    hbar: float | None = None,
) -> np.ndarray:
    """Lewis-Riesenfeld phase alpha(t) of one smooth mode path phi[i] = phi(t_i).

    alpha(t) = (1/hbar) int <phi|(i hbar d_t - H)|phi> dt'. The derivative
    term uses the antisymmetrized midpoint overlap, which is real by
    construction; the energy term uses the trapezoid rule.
    """
    hb = config.hbar(hbar)
    grid = np.asarray(grid, dtype=float)
    phi = np.asarray(phi, dtype=complex)
    _check_mode_continuity(phi[:, :, None])
    ov = np.einsum("ti,ti->t", phi[:-1].conj(), phi[1:])
    deriv_inc = -np.imag(ov)  # (1/hbar) * i*hbar <phi|dphi> integrated over the interval
    energy = np.array([np.real(np.vdot(phi[i], np.asarray(H_of_t(t), dtype=complex) @ phi[i]))
                       for i, t in enumerate(grid)])
    dt = np.diff(grid)
    energy_inc = 0.5 * (energy[:-1] + energy[1:]) * dt / hb
    alpha = np.zeros(len(grid))
    alpha[1:] = np.cumsum(deriv_inc - energy_inc)
    return alpha


def hamiltonian_from_modes(
    grid: np.ndarray,
    modes: np.ndarray,
    alpha_rates: np.ndarray,
    dmodes: np.ndarray | None = None,
    hbar: float | None = None,
    herm_tol: float = 1e-9,
) -> np.ndarray:
    """Inverse-engineered Hamiltonian driving the given mode paths and phases.

    H(t) = -hbar sum_n (d alpha_n/dt) |phi_n><phi_n| + i hbar sum_n |d_t phi_n><phi_n|.
    Evolving |phi_n(0)> under it reproduces e^{i alpha_n(t)} |phi_n(t)>.
    ``alpha_rates``: array (n_t, D). ``dmodes``: analytic mode derivatives;
    centered differences otherwise (supply analytic ones when the Hermiticity
    tolerance matters).
    """
    hb = config.hbar(hbar)
    grid = np.asarray(grid, dtype=float)
    modes = np.asarray(modes, dtype=complex)
    n_t, D, _ = modes.shape
    for i in (0, n_t // 2, n_t - 1):
        G = modes[i].conj().T @ modes[i]
        if np.abs(G - np.eye(D)).max() > 1e-8:
            raise ValueError(f"modes are not orthonormal at grid index {i}")
    if dmodes is None:
        dmodes = np.gradient(modes, grid, axis=0)
    out = np.empty_like(modes)
    for i in range(n_t):
        P = -hb * np.einsum("n,in,jn->ij", alpha_rates[i], modes[i], modes[i].conj())
        Kmat = 1j * hb * dmodes[i] @ modes[i].conj().T
        H = P + Kmat
        dev = np.abs(H - H.conj().T).max()
        if dev > herm_tol * max(np.abs(H).max(), 1e-300):
            raise AssertionError(
                f"inverse-engineered H not Hermitian at t = {grid[i]}: dev {dev:.3e}; "
                "supply analytic dmodes or refine the grid"
            )
        out[i] = 0.5 * (H + H.conj().T)  # remove only the sub-tolerance noise just checked
    return out


def decompose_in_invariant_basis(
    H: np.ndarray, modes: np.ndarray, dmodes: np.ndarray, hbar: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Split H at one time into its diagonal part in the mode basis and the
    counterdiabatic-like off-diagonal generator of the mode motion.

    Returns (diagonal part, cd-like part); the two sum to H when the modes
    actually diagonalize an invariant of H (general decomposition identity).
    """
    hb = config.hbar(hbar)
    modes = np.asarray(modes, dtype=complex)
    D = modes.shape[0]
    G = modes.conj().T @ modes
    if np.abs(G - np.eye(D)).max() > 1e-8:
        raise ValueError("modes are not orthonormal")
    h_el = modes.conj().T @ np.asarray(H, dtype=complex) @ modes
    diag = modes @ np.diag(np.diagonal(h_el).real) @ modes.conj().T
    A = modes.conj().T @ np.asarray(dmodes, dtype=complex)   # A[n, m] = <phi_n|d_t phi_m>
    A = A - np.diag(np.diagonal(A))
    cd = 1j * hb * modes @ A @ modes.conj().T
    return diag, cd


@dataclass
class AlgebraSpec:
    """Closed operator algebra for invariant-based inverse engineering.

    ``basis`` holds the full orthonormal generator set X; the Hamiltonian
    lives on span(A), the invariant on span(B). T is the structure tensor
    [X_j, X_k] = i sum_l T_jkl X_l.
    """

    basis: OperatorBasis
    A_indices: list[int]
    B_indices: list[int]
    T: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.T is None:
            self.T = structure_constants(self.basis)

    def verify(self, tol: float = 1e-10) -> None:
        """Check the structure constants and the [A, B] in span(B) closure."""
        X = self.basis.elements
        n = len(X)
        for j in range(n):
            for k in range(n):
                target = 1j * sum(self.T[j, k, l] * X[l] for l in range(n))
                if frobenius_norm(commutator(X[j], X[k]) - target) > tol:
                    raise ValueError(f"structure constants wrong for pair ({j}, {k})")
        outside = [l for l in range(n) if l not in self.B_indices]
        for k in self.A_indices:
            for l in self.B_indices:
                leak = np.abs(self.T[k, l, :][outside]).max() if outside else 0.0
                if leak > tol:
                    raise ValueError(
                        f"[X_{k}, X_{l}] leaks outside span(B) by {leak:.2e}: closure fails"
                    )


def structure_constants(basis: OperatorBasis) -> np.ndarray:
    """T_jkl with [X_j, X_k] = i sum_l T_jkl X_l for an orthonormal basis.

    Antisymmetric in (j, k); raises if the set does not close.
    """
    X = basis.elements
    n = len(X)
    T = np.zeros((n, n, n))
    for j in range(n):
        for k in range(j + 1, n):
            C = -1j * commutator(X[j], X[k])   # Hermitian
            coeffs = np.array([frobenius_inner(L, C) for L in X])
            recon = sum(c * L for c, L in zip(coeffs, X))
            if frobenius_norm(C - recon) > 1e-10 * max(1.0, frobenius_norm(C)):
                raise ValueError(f"[X_{j}, X_{k}] is not in the span of the generator set")
            if np.abs(coeffs.imag).max() > 1e-10:
                raise ValueError("structure constants must be real for Hermitian generators")
            T[j, k, :] = coeffs.real
            T[k, j, :] = -coeffs.real
    return T


def inverse_engineer_schedule(
    algebra: AlgebraSpec,
    f_target: np.ndarray,
    df_target: np.ndarray,
    grid: np.ndarray,
    hbar: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian coefficients h_k(t) on span(A) driving a target invariant.

    Substituting F = sum_l f_l X_l and H = sum_k h_k X_k into the von Neumann
    equation gives, per time, the real linear system
        hbar df_j/dt = sum_{k in A, l in B} T_klj h_k f_l,   j in B,
    solved here in the least-squares sense (minimum-norm h when
    under-determined). Returns (h, residuals) with h of shape (n_t, |A|).
    """
    hb = config.hbar(hbar)
    grid = np.asarray(grid, dtype=float)
    f_target = np.asarray(f_target, dtype=float)     # (n_t, |B|)
    df_target = np.asarray(df_target, dtype=float)
    A_idx, B_idx = algebra.A_indices, algebra.B_indices
    n_t = len(grid)
    h = np.zeros((n_t, len(A_idx)))
    res = np.zeros(n_t)
    for i in range(n_t):
        M = np.zeros((len(B_idx), len(A_idx)))
        for jj, j in enumerate(B_idx):
            for kk, k in enumerate(A_idx):
                M[jj, kk] = sum(
                    algebra.T[k, l, j] * f_target[i, ll] for ll, l in enumerate(B_idx)
                )
        rhs = hb * df_target[i]
        sol, _, _, _ = np.linalg.lstsq(M, rhs, rcond=None)
        h[i] = sol
        res[i] = np.linalg.norm(M @ sol - rhs)
    return h, res
