"""Operator algebra foundation.

Dense complex matrices throughout (target D <= 1024). The inner product is
the dimension-normalized Frobenius one, (X|Y) = Tr(X^dag Y)/D, so that every
Pauli string has unit norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import config
from .errors import DimensionMismatchError, HermiticityError, SpanningError

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_same_dim(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape or X.shape[0] != X.shape[1]:
        raise DimensionMismatchError(f"operands have shapes {X.shape} and {Y.shape}")


def as_hermitian(A: np.ndarray, tol: float = config.TOL_HERM) -> np.ndarray:
    """Validate Hermiticity and return the array unchanged.

    Violations raise HermiticityError; the input is never symmetrized, since
    that would hide upstream bugs.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    scale = np.abs(A).max()
    dev = np.abs(A - A.conj().T).max()
    if dev > tol * max(scale, 1e-300):
        raise HermiticityError(f"max |A - A^dag| = {dev:.3e} exceeds {tol:.1e} * max|A| = {tol * scale:.3e}")
    return A


def frobenius_inner(X: np.ndarray, Y: np.ndarray) -> complex:
    """Dimension-normalized Frobenius inner product Tr(X^dag Y)/D."""
    _check_same_dim(X, Y)
    return complex(np.einsum("ij,ij->", X.conj(), Y)) / X.shape[0]


def frobenius_norm(X: np.ndarray) -> float:
    """sqrt of the real part of (X|X)."""
    return float(np.sqrt(max(frobenius_inner(X, X).real, 0.0)))


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """[X, Y] = XY - YX. Anti-Hermitian when X and Y are Hermitian."""
    _check_same_dim(X, Y)
    return X @ Y - Y @ X


def liouvillian_apply(H: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Action of the closed-system Liouvillian: [H, X]."""
    return commutator(H, X)


def nested_commutator(H: np.ndarray, dH: np.ndarray, k: int, k_max: int = 12) -> np.ndarray:
    """k-fold nested commutator of H with dH: the k = 0 case is dH itself.

    Hermitian for even k and anti-Hermitian for odd k when H, dH are
    Hermitian. Norms grow roughly like (spectral spread)^k; growth beyond
    the overflow guard aborts with a hint to rescale H.
    """
    _check_same_dim(H, dH)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > k_max:
        raise ValueError(f"k = {k} exceeds k_max = {k_max}")
    out = dH
    for _ in range(k):
        out = commutator(H, out)
        if not np.isfinite(out).all() or np.abs(out).max() > config.NORM_OVERFLOW:
            raise OverflowError(
                "nested-commutator norm overflow; rescale H to O(1) spectral spread"
            )
    return out


@dataclass
class OperatorBasis:
    """Ordered list of traceless Hermitian operators, orthonormal under (.|.)."""

    elements: list[np.ndarray]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [f"L{i}" for i in range(len(self.elements))]
        if len(self.labels) != len(self.elements):
            raise ValueError("labels and elements must have equal length")

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def validate(self, tol: float = 1e-12) -> None:
        """Check tracelessness, Hermiticity and pairwise orthonormality."""
        for L, lab in zip(self.elements, self.labels):
            if abs(np.trace(L)) > tol * max(1.0, np.abs(L).max()):
                raise ValueError(f"basis element {lab} is not traceless")
            as_hermitian(L, tol=max(tol, config.TOL_HERM))
        G = gram_matrix(self.elements)
        if np.abs(G - np.eye(len(self))).max() > max(tol, 1e-12):
            raise ValueError("basis is not orthonormal under the Frobenius inner product")

    def subset(self, indices) -> "OperatorBasis":
        return OperatorBasis([self.elements[i] for i in indices], [self.labels[i] for i in indices])


def gram_matrix(ops) -> np.ndarray:
    n = len(ops)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = frobenius_inner(ops[i], ops[j])
    return G


def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-site Paulis, e.g. 'XZY'. Unit Frobenius norm."""
    out = np.array([[1.0 + 0j]])
    for ch in label:
        try:
            out = np.kron(out, _PAULI[ch])
        except KeyError:
            raise ValueError(f"unknown Pauli letter {ch!r} in {label!r}") from None
    return out


def pauli_basis(n_qubits: int) -> OperatorBasis:
    """All 4^n - 1 non-identity Pauli strings, lexicographic in I<X<Y<Z per site.

    Already orthonormal under (.|.) without extra scaling.
    """
    if not 1 <= n_qubits <= 10:
        raise ValueError("n_qubits must be between 1 and 10")
    labels = ["".join(p) for p in product("IXYZ", repeat=n_qubits)][1:]
    return OperatorBasis([pauli_matrix(lab) for lab in labels], labels)


def gell_mann_basis(dim: int) -> OperatorBasis:
    """Generalized Gell-Mann basis for arbitrary D, normalized to (L|L) = 1.

    Symmetric pairs S(i,j), antisymmetric pairs A(i,j), then diagonal D(k).
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    elems: list[np.ndarray] = []
    labels: list[str] = []
    s = np.sqrt(dim / 2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            S = np.zeros((dim, dim), dtype=complex)
            S[i, j] = S[j, i] = 1.0
            elems.append(s * S)
            labels.append(f"S{i}{j}")
            A = np.zeros((dim, dim), dtype=complex)
            A[i, j] = -1j
            A[j, i] = 1j
            elems.append(s * A)
            labels.append(f"A{i}{j}")
    for k in range(1, dim):
        Dg = np.zeros((dim, dim), dtype=complex)
        Dg[:k, :k] = np.eye(k)
        Dg[k, k] = -k
        Dg *= np.sqrt(dim / (k * (k + 1.0)))
        elems.append(Dg)
        labels.append(f"D{k}")
    return OperatorBasis(elems, labels)


def expand_in_basis(X: np.ndarray, basis: OperatorBasis, residual_tol: float = 1e-8) -> np.ndarray:
    """Coefficients c_mu = (L_mu|X) of a traceless operator in an orthonormal basis.

    If the basis does not span X the residual exceeds residual_tol and a
    SpanningError is raised rather than silently truncating.
    """
    _check_same_dim(X, basis.elements[0])
    coeffs = np.array([frobenius_inner(L, X) for L in basis.elements])
    recon = reconstruct_from_basis(coeffs, basis)
    res = frobenius_norm(X - recon)
    if res > residual_tol * max(1.0, frobenius_norm(X)):
        raise SpanningError(f"expansion residual {res:.3e} exceeds {residual_tol:.1e}")
    return coeffs


def reconstruct_from_basis(coeffs: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    out = np.zeros_like(basis.elements[0])
    for c, L in zip(coeffs, basis.elements):
        out = out + c * L
    return out
