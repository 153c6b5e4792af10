"""Approximate counterdiabatic construction without eigenstates.

Three routes, all reducing to one linear system B a = u over a trial span:

* variational -- nested-commutator ansatz, B_kl = ||O_{k+l}||^2, u_k = -||O_k||^2;
* algebraic   -- user-supplied Hermitian trial basis, B_kl = ([H,L_k]|[H,L_l]);
* krylov      -- Lanczos operator chain, B tridiagonal in the chain normalizations.

For identical spans the three assembled operators coincide; at full span they
reproduce the exact counterdiabatic term (zero-diagonal in the eigenbasis).

Sign convention: the solved coefficients are real and multiply the Hermitian
operators stored in ``basis_ops`` (i*hbar times an anti-Hermitian chain/ansatz
element, or -hbar times a Hermitian trial element). The convention is pinned
by agreement with the spectral construction on two-level models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.linalg

from . import config
from .errors import DimensionMismatchError
from .operators import OperatorBasis, commutator, expand_in_basis, frobenius_inner, frobenius_norm


@dataclass
class LinearCDSystem:
    """B a = u for approximate counterdiabatic coefficients.

    B is real symmetric positive semidefinite; for the krylov method it is
    tridiagonal. ``basis_ops`` are the Hermitian operators the solved
    coefficients multiply.
    """

    B: np.ndarray
    u: np.ndarray
    method: str
    basis_ops: list
    metadata: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.u)

    @property
    def empty(self) -> bool:
        return self.size == 0


@dataclass
class KrylovChain:
    """Orthonormal operator chain from Lanczos on the Liouvillian.

    ``ops[k]`` alternate Hermitian (even k) and anti-Hermitian (odd k);
    ``b[k]`` are the positive chain normalizations, with b[0] = ||dH||.
    ``b_next`` is the would-be next normalization: below the termination
    tolerance for a naturally complete chain, finite when truncated by k_max.
    """

    ops: list
    b: np.ndarray
    b_next: float
    term_tol: float

    @property
    def K(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]


def _chain_norms(H: np.ndarray, dH: np.ndarray, order: int):
    """Normalized nested commutators N_k = O_k/||O_k|| and the successive
    norm factors; ||O_k|| is the cumulative product of the factors."""
    n0 = frobenius_norm(dH)
    if n0 == 0.0:
        raise ValueError("dH vanishes; the counterdiabatic term is zero")
    N = [dH / n0]
    factors = [n0]
    logC = [np.log(n0)]
    for k in range(1, order + 1):
        W = commutator(H, N[-1])
        nw = frobenius_norm(W)
        if nw < 1e-14:
            break
        N.append(W / nw)
        factors.append(nw)
        logC.append(logC[-1] + np.log(nw))
        if logC[-1] > np.log(config.NORM_OVERFLOW):
            raise OverflowError(
                "nested-commutator norms exceed 1e150; rescale H (and dH) to O(1) "
                "spectral spread before building the variational system"
            )
    return N, np.array(factors), np.array(logC)


def variational_system(
    H: np.ndarray, dH: np.ndarray, K_tr: int, hbar: float | None = None
) -> LinearCDSystem:
    """Variational nested-commutator system at truncation order K_tr.

    B_kl = ||O_{k+l}||^2 and u_k = -||O_k||^2 in the nested-commutator norms;
    the ansatz operators are i*hbar times the odd nested commutators. Norm
    factors are accumulated in log space so entries overflow loudly, not
    silently.
    """
    if K_tr < 1:
        raise ValueError("K_tr must be >= 1")
    hb = config.hbar(hbar)
    N, factors, logC = _chain_norms(H, dH, 2 * K_tr)
    avail = (len(N) - 1) // 2
    k = min(K_tr, avail)
    if k == 0:
        return LinearCDSystem(
            B=np.zeros((0, 0)), u=np.zeros(0), method="variational_nc", basis_ops=[],
            metadata={"note": "commuting family: [H, dH] = 0, no counterdiabatic term"},
        )
    B = np.empty((k, k))
    u = np.empty(k)
    for i in range(1, k + 1):
        u[i - 1] = -np.exp(2 * logC[i])
        for j in range(1, k + 1):
            B[i - 1, j - 1] = np.exp(2 * logC[i + j])
    ops = [1j * hb * np.exp(logC[2 * i - 1]) * N[2 * i - 1] for i in range(1, k + 1)]
    return LinearCDSystem(B=B, u=u, method="variational_nc", basis_ops=ops,
                          metadata={"K_tr": k, "requested_K_tr": K_tr})


def algebraic_system(
    H: np.ndarray, dH: np.ndarray, trial_basis: OperatorBasis, hbar: float | None = None
) -> LinearCDSystem:
    """Algebraic system over a Hermitian orthonormal trial basis.

    B_kl = ([H, L_k]|[H, L_l]) and u_k carries the inner product of the
    commutator condition with L_k; the solved coefficients multiply
    basis_ops[k] = -hbar * L_k.
    """
    if len(trial_basis) == 0:
        raise ValueError("trial basis is empty")
    hb = config.hbar(hbar)
    if H.shape != trial_basis.elements[0].shape:
        raise DimensionMismatchError("trial basis dimension does not match H")
    LH = [commutator(H, L) for L in trial_basis.elements]
    k = len(LH)
    B = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            val = frobenius_inner(LH[i], LH[j]).real
            B[i, j] = B[j, i] = val
    u = np.array([(1j * frobenius_inner(LHk, dH)).real for LHk in LH])
    ops = [-hb * L for L in trial_basis.elements]
    return LinearCDSystem(B=B, u=u, method="algebraic", basis_ops=ops,
                          metadata={"labels": list(trial_basis.labels)})


def krylov_chain(
    H: np.ndarray,
    dH: np.ndarray,
    k_max: int | None = None,
    term_tol: float | None = None,
) -> KrylovChain:
    """Lanczos three-term recurrence on the Liouvillian with full
    re-orthogonalization; terminates at b < term_tol * b_0 or k_max.

    The chain length satisfies K <= D^2 - D + 1.
    """
    b0 = frobenius_norm(dH)
    if b0 == 0.0:
        raise ValueError("dH vanishes; no Krylov chain exists")
    D = H.shape[0]
    hard_cap = D * D - D + 1
    if k_max is None:
        k_max = hard_cap
    k_max = min(k_max, hard_cap)
    tol = (1e-10 if term_tol is None else term_tol) * b0
    ops = [np.asarray(dH, dtype=complex) / b0]
    bs = [b0]
    prev, cur = None, ops[0]
    b_next = 0.0
    while len(ops) < k_max:
        W = commutator(H, cur)
        if prev is not None:
            W = W - bs[-1] * prev
        # full re-orthogonalization, twice: drift here is the dominant failure mode
        for _ in range(2):
            for O in ops:
                W = W - frobenius_inner(O, W) * O
        b = frobenius_norm(W)
        if b < tol:
            b_next = b
            break
        ops.append(W / b)
        bs.append(b)
        prev, cur = ops[-2], ops[-1]
        b_next = np.nan
    if np.isnan(b_next):
        # truncated by k_max: still compute the next normalization for B
        W = commutator(H, cur) - bs[-1] * prev if prev is not None else commutator(H, cur)
        for _ in range(2):
            for O in ops:
                W = W - frobenius_inner(O, W) * O
        b_next = frobenius_norm(W)
    return KrylovChain(ops=ops, b=np.array(bs), b_next=float(b_next), term_tol=tol)


def krylov_system(chain: KrylovChain, hbar: float | None = None) -> LinearCDSystem:
    """Tridiagonal system in the Krylov chain normalizations.

    B_kl = (b_{2k-1}^2 + b_{2k}^2) delta_kl + b_{2k-2} b_{2k-1} delta_{k,l+1}
    + b_{2k} b_{2k+1} delta_{k+1,l}; u_k = -b_0 b_1 delta_{k1}. Size
    floor(K/2); a chain with K < 2 means the counterdiabatic term is zero and
    the returned system is empty.
    """
    hb = config.hbar(hbar)
    K = chain.K
    nb = K // 2
    if nb == 0:
        return LinearCDSystem(B=np.zeros((0, 0)), u=np.zeros(0), method="krylov",
                              basis_ops=[], metadata={"K": K, "empty_reason": "K < 2"})
    # b[j] for j >= K: the terminating/truncation value, then zero beyond
    def bval(j: int) -> float:
        if j < K:
            return float(chain.b[j])
        if j == K:
            return chain.b_next
        return 0.0

    B = np.zeros((nb, nb))
    u = np.zeros(nb)
    for k in range(1, nb + 1):
        B[k - 1, k - 1] = bval(2 * k - 1) ** 2 + bval(2 * k) ** 2
        if k >= 2:
            B[k - 1, k - 2] = bval(2 * k - 2) * bval(2 * k - 1)
        if k < nb:
            B[k - 1, k] = bval(2 * k) * bval(2 * k + 1)
    u[0] = -bval(0) * bval(1)
    ops = [1j * hb * chain.ops[2 * k - 1] for k in range(1, nb + 1)]
    return LinearCDSystem(B=B, u=u, method="krylov", basis_ops=ops, metadata={"K": K})


def solve_cd(system: LinearCDSystem) -> np.ndarray:
    """Solve B a = u.

    Krylov systems use an O(k) banded (Thomas) solve. Dense systems are
    diagonally equilibrated and solved by minimum-norm least squares with a
    relative rank tolerance of 1e-12, so rank deficiency yields a
    deterministic solution (recorded in metadata) instead of an error.
    """
    if system.empty:
        return np.zeros(0)
    B, u = system.B, system.u
    if system.method == "krylov" and system.size > 1:
        ab = np.zeros((3, system.size))
        ab[0, 1:] = np.diagonal(B, 1)
        ab[1] = np.diagonal(B)
        ab[2, :-1] = np.diagonal(B, -1)
        try:
            return scipy.linalg.solve_banded((1, 1), ab, u)
        except scipy.linalg.LinAlgError:
            pass  # fall through to least squares
    a, _, rank, _ = np.linalg.lstsq(B, u, rcond=1e-12)
    if rank < system.size:
        # min-norm coefficients have no component along the trial-span kernel
        system.metadata["rank_deficiency"] = int(system.size - rank)
    return a


def assemble_cd(system: LinearCDSystem, a: np.ndarray) -> np.ndarray:
    """H_cd = sum_k a_k basis_ops[k]; Hermitian within 1e-10 by construction."""
    if len(a) != system.size:
        raise ValueError(f"coefficient length {len(a)} != system size {system.size}")
    if system.empty:
        raise ValueError("cannot assemble from an empty system without a dimension")
    out = np.zeros_like(system.basis_ops[0])
    for ak, op in zip(a, system.basis_ops):
        out = out + ak * op
    dev = np.abs(out - out.conj().T).max()
    if dev > 1e-10 * max(np.abs(out).max(), 1e-300):
        raise AssertionError(f"assembled counterdiabatic term not Hermitian: dev {dev:.3e}")
    return out


def action_value(
    H: np.ndarray, dH: np.ndarray, H_cd_trial: np.ndarray, hbar: float | None = None
) -> float:
    """Variational cost ||G||^2 with G = dH - (i/hbar)[H, H_cd_trial].

    The solved coefficients of any of the three systems sit at a stationary
    point of this quadratic along every ansatz direction.
    """
    hb = config.hbar(hbar)
    G = dH - (1j / hb) * commutator(H, H_cd_trial)
    return frobenius_norm(G) ** 2


# ---------------------------------------------------------------------------
# End-to-end constructions


def krylov_cd(
    H: np.ndarray,
    dH: np.ndarray,
    k_max: int | None = None,
    term_tol: float | None = None,
    hbar: float | None = None,
) -> np.ndarray:
    """Counterdiabatic operator from the Krylov route (full chain by default)."""
    chain = krylov_chain(H, dH, k_max=k_max, term_tol=term_tol)
    system = krylov_system(chain, hbar=hbar)
    if system.empty:
        return np.zeros_like(np.asarray(H, dtype=complex))
    return assemble_cd(system, solve_cd(system))


def algebraic_cd(
    H: np.ndarray, dH: np.ndarray, trial_basis: OperatorBasis, hbar: float | None = None
) -> np.ndarray:
    """Counterdiabatic operator from the algebraic route over a trial basis."""
    system = algebraic_system(H, dH, trial_basis, hbar=hbar)
    return assemble_cd(system, solve_cd(system))


#: beyond this truncation order the float64 moment route loses the needed
#: digits and the construction transparently switches to extended precision
FLOAT64_ORDER_LIMIT = 6


def variational_cd(
    H: np.ndarray,
    dH: np.ndarray,
    K_tr: int,
    hbar: float | None = None,
    precision: str = "auto",
) -> np.ndarray:
    """Counterdiabatic operator from the variational nested-commutator route.

    precision:
        "float64"  -- direct least-squares minimization of the action over the
                      ansatz span (adequate for K_tr <= ~6);
        "extended" -- the full moment pipeline in mpmath arithmetic, needed at
                      high orders where the moment matrix condition number
                      exceeds float64 range;
        "auto"     -- float64 up to FLOAT64_ORDER_LIMIT, extended beyond.
    """
    if precision not in ("auto", "float64", "extended"):
        raise ValueError(f"unknown precision {precision!r}")
    hb = config.hbar(hbar)
    if precision == "auto":
        precision = "float64" if K_tr <= FLOAT64_ORDER_LIMIT else "extended"
    if precision == "extended":
        return _variational_cd_mp(H, dH, K_tr, hb)

    N, factors, logC = _chain_norms(H, dH, 2 * K_tr)
    avail = (len(N) - 1) // 2
    k = min(K_tr, avail)
    if k == 0:
        return np.zeros_like(np.asarray(H, dtype=complex))
    # minimize ||N_0 + sum_k atil_k N_{2k}|| directly (the variational principle
    # in its least-squares form, equivalent to B a = u but backward stable)
    cols = np.stack([N[2 * i].ravel() for i in range(1, k + 1)], axis=1)
    target = -N[0].ravel()
    A = np.vstack([cols.real, cols.imag])
    rhs = np.concatenate([target.real, target.imag])
    atil, *_ = np.linalg.lstsq(A, rhs, rcond=1e-13)
    for _ in range(2):  # iterative refinement against roundoff in the QR
        r = rhs - A @ atil
        datil, *_ = np.linalg.lstsq(A, r, rcond=1e-13)
        atil = atil + datil
    out = np.zeros_like(N[0])
    for i in range(1, k + 1):
        scale = np.exp(logC[0] + logC[2 * i - 1] - logC[2 * i])
        out = out + (atil[i - 1] * scale) * N[2 * i - 1]
    return 1j * hb * out


def _variational_cd_mp(H: np.ndarray, dH: np.ndarray, K_tr: int, hb: float) -> np.ndarray:
    """Moment-matrix variational pipeline in mpmath arithmetic.

    The normalized-moment Gram matrix at order k has condition number growing
    like exp(c k); at desk scale (D <= ~10) the whole chain-Gram-solve-assemble
    pipeline in ~(30 + 2.5 K_tr)-digit arithmetic is cheap and exact enough.
    """
    from mpmath import mp, mpc
    from mpmath import matrix as mpmatrix

    D = H.shape[0]
    dps = max(50, 30 + int(2.5 * K_tr))
    with mp.workdps(dps):
        def to_mp(A):
            M = mpmatrix(D, D)
            for i in range(D):
                for j in range(D):
                    M[i, j] = mpc(complex(A[i, j]).real, complex(A[i, j]).imag)
            return M

        def inner(X, Y):
            s = mpc(0)
            for i in range(D):
                for j in range(D):
                    s += X[i, j].conjugate() * Y[i, j]
            return s / D

        Hm = to_mp(np.asarray(H, dtype=complex))
        N = [to_mp(np.asarray(dH, dtype=complex))]
        n0 = mp.sqrt(inner(N[0], N[0]).real)
        if n0 == 0:
            return np.zeros((D, D), dtype=complex)
        N[0] = N[0] / n0
        lognorm = [mp.log(n0)]
        for k in range(1, 2 * K_tr + 1):
            W = Hm * N[-1] - N[-1] * Hm
            nw = mp.sqrt(inner(W, W).real)
            if nw < mp.mpf("1e-30") * n0:
                break
            N.append(W / nw)
            lognorm.append(lognorm[-1] + mp.log(nw))
        k = min(K_tr, (len(N) - 1) // 2)
        if k == 0:
            return np.zeros((D, D), dtype=complex)
        B = mpmatrix(k, k)
        u = mpmatrix(k, 1)
        for i in range(1, k + 1):
            u[i - 1] = -inner(N[2 * i], N[0]).real
            for j in range(1, k + 1):
                B[i - 1, j - 1] = inner(N[2 * i], N[2 * j]).real
        atil = mp.lu_solve(B, u)
        CD = mpmatrix(D, D)
        for i in range(1, k + 1):
            scale = mp.e ** (lognorm[0] + lognorm[2 * i - 1] - lognorm[2 * i])
            CD += (atil[i - 1] * scale) * N[2 * i - 1]
        out = np.empty((D, D), dtype=complex)
        for i in range(D):
            for j in range(D):
                out[i, j] = complex(CD[i, j])
    return 1j * hb * out


def odd_commutator_support(
    H: np.ndarray,
    dH: np.ndarray,
    basis: OperatorBasis,
    max_order: int | None = None,
    tol: float = 1e-10,
) -> list[int]:
    """Indices of basis elements appearing in the odd nested commutators.

    Expands -i * O_{2k-1} (Hermitian) in the given orthonormal basis and
    accumulates the support until it stops growing; the returned sublist is
    the natural trial basis for the algebraic route.
    """
    D = H.shape[0]
    if max_order is None:
        max_order = (D * D - D + 1) // 2 + 1
    N, _, _ = _chain_norms(H, dH, 2 * max_order)
    support: set[int] = set()
    stable = 0
    for k in range(1, (len(N) + 1) // 2 + 1):
        if 2 * k - 1 >= len(N):
            break
        Xh = -1j * N[2 * k - 1]
        coeffs = np.array([frobenius_inner(L, Xh) for L in basis.elements])
        new = {int(i) for i in np.nonzero(np.abs(coeffs) > tol)[0]}
        if new <= support:
            stable += 1
            if stable >= 2:
                break
        else:
            stable = 0
            support |= new
    return sorted(support)


def cd_integral_representation(
    H: np.ndarray,
    dH: np.ndarray,
    eta: float,
    hbar: float | None = None,
) -> np.ndarray:
    """Validation identity: the regularized integral form of the exact
    counterdiabatic term at finite damping eta.

    Matrix elements are Fourier-type integrals over the fictitious evolution
    of dH, evaluated with QUADPACK's oscillatory-weight quadrature. The
    series/integral exchange behind the nested-commutator expansion does not
    converge in general, so this form is a small-dimension cross-check only;
    production construction always goes through B a = u.
    """
    hb = config.hbar(hbar)
    E, V = np.linalg.eigh(np.asarray(H, dtype=complex))
    dHe = V.conj().T @ np.asarray(dH, dtype=complex) @ V
    D = H.shape[0]
    M = np.zeros((D, D), dtype=complex)
    for m in range(D):
        for n in range(D):
            if m == n:
                continue
            w = (E[m] - E[n]) / hb
            # -(1/2) * integral sgn(u) e^{-eta|u|} e^{i w u} du = -i w/(eta^2+w^2)
            # evaluated numerically: 2*sin-weighted QAWF integral over [0, inf)
            val, _ = scipy.integrate.quad(
                lambda uu: np.exp(-eta * uu), 0, np.inf, weight="sin", wvar=w
            )
            M[m, n] = -1j * dHe[m, n] * val
    return V @ M @ V.conj().T
