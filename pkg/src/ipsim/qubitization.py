"""PREPARE/SELECT oracles, the qubitization walk, an idealized spectral
transform for time evolution, and query-cost evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linops import expm_hermitian, is_unitary, spectral_norm
from .models import LcuDecomposition


def ancilla_dim(L: int) -> int:
    return 1 << max(0, math.ceil(math.log2(L))) if L > 1 else 1


@dataclass(frozen=True)
class BlockEncoding:
    """Unitary on ancilla (x) system whose signal block approximates A / alpha."""

    unitary: np.ndarray
    ancilla_dim: int
    alpha: float
    epsilon: float
    signal_state: Optional[np.ndarray] = None

    @property
    def system_dim(self) -> int:
        return self.unitary.shape[0] // self.ancilla_dim

    def _signal(self) -> np.ndarray:
        if self.signal_state is not None:
            return self.signal_state
        s = np.zeros(self.ancilla_dim, dtype=complex)
        s[0] = 1
        return s

    def block(self) -> np.ndarray:
        """(<S| (x) I) U (|S> (x) I)."""
        d = self.system_dim
        s = self._signal()
        U = self.unitary.reshape(self.ancilla_dim, d, self.ancilla_dim, d)
        return np.einsum("a,aibj,b->ij", s.conj(), U, s)

    def verify(self, A) -> float:
        """Return the block error against ``A``; raise if it exceeds ``epsilon``."""
        err = spectral_norm(np.asarray(A) - self.alpha * self.block())
        if err > self.epsilon * (1 + 1e-9) + 1e-15:
            raise AssertionError(f"block error {err:.3e} exceeds certified {self.epsilon:.3e}")
        return err


@dataclass(frozen=True)
class WalkOperator:
    matrix: np.ndarray
    lcu: LcuDecomposition
    ancilla_dim: int
    signal_state: np.ndarray

    def eigenphases(self) -> np.ndarray:
        return np.sort(np.angle(np.linalg.eigvals(self.matrix)))


def prepare_matrix(lcu: LcuDecomposition, anc: Optional[int] = None) -> np.ndarray:
    """Unitary whose first column is sum_l sqrt(w_l / lambda)|l>, completed by a Householder reflection."""
    lam = lcu.lam
    if lam <= 0:
        raise ValueError("total LCU weight must be positive")
    A = anc or ancilla_dim(lcu.L)
    if A < lcu.L:
        raise ValueError("ancilla dimension smaller than the number of terms")
    v = np.zeros(A)
    v[:lcu.L] = np.sqrt(lcu.weights / lam)
    e0 = np.zeros(A)
    e0[0] = 1.0
    u = e0 - v
    nu = np.dot(u, u)
    if nu < 1e-30:
        return np.eye(A, dtype=complex)
    return (np.eye(A) - 2.0 * np.outer(u, u) / nu).astype(complex)


def _pairing(lcu: LcuDecomposition) -> np.ndarray:
    if lcu.adjoint_index is not None:
        adj = lcu.adjoint_index
        if not np.allclose(lcu.weights[adj], lcu.weights):
            raise ValueError("adjoint-paired terms must carry equal weights")
        return adj
    return np.arange(lcu.L)


def select_matrix(lcu: LcuDecomposition, anc: Optional[int] = None) -> np.ndarray:
    """SELECT = sum_l |pi(l)><l| (x) U_l with identity on padding indices.

    pi is the identity for self-inverse terms, giving the usual block-diagonal
    form. When an adjoint pairing is present, pi maps each term to its adjoint
    partner, which keeps SELECT Hermitian while leaving the signal block
    equal to H / lambda.
    """
    A = anc or ancilla_dim(lcu.L)
    d = lcu.dim
    pi = _pairing(lcu)
    out = np.zeros((A, d, A, d), dtype=complex)
    for l, U in enumerate(lcu.unitaries):
        U = np.asarray(U)
        if lcu.adjoint_index is None and not is_unitary(U):
            raise ValueError("SELECT term is not unitary")
        out[pi[l], :, l, :] = U
    for l in range(lcu.L, A):
        out[l, :, l, :] = np.eye(d)
    return out.reshape(A * d, A * d)


def signal_block(M: np.ndarray, state: np.ndarray, d: int) -> np.ndarray:
    A = len(state)
    T = M.reshape(A, d, A, d)
    return np.einsum("a,aibj,b->ij", state.conj(), T, state)


def prepared_state(lcu: LcuDecomposition, anc: Optional[int] = None) -> np.ndarray:
    return prepare_matrix(lcu, anc)[:, 0]


def walk_operator(lcu: LcuDecomposition, anc: Optional[int] = None) -> WalkOperator:
    """(2|L><L| (x) I - I) SELECT."""
    A = anc or ancilla_dim(lcu.L)
    d = lcu.dim
    S = select_matrix(lcu, A)
    ell = prepared_state(lcu, A)
    R = np.kron(2 * np.outer(ell, ell.conj()) - np.eye(A), np.eye(d))
    H = lcu.matrix()
    if np.max(np.abs(np.linalg.eigvalsh(H))) > lcu.lam * (1 + 1e-12):
        raise ValueError("Hamiltonian norm exceeds LCU lambda; weights and terms disagree")
    return WalkOperator(R @ S, lcu, A, ell)


def walk_spectrum_check(w: WalkOperator) -> float:
    """Largest distance from lambda*cos(phase) to each eigenvalue of H."""
    cosines = w.lcu.lam * np.cos(w.eigenphases())
    ev = np.linalg.eigvalsh(w.lcu.matrix())
    return float(max(np.min(np.abs(cosines - e)) for e in ev))


def ideal_evolution_encoding(w: WalkOperator, t: float) -> BlockEncoding:
    """Block encoding of exp(-iHt) by the exact spectral transform f(W) = exp(-i lam t cos(arg W)).

    For the unitary walk, cos of the eigenphases are the eigenvalues of the
    Hermitian part (W + W^dag)/2, so f(W) is an ordinary Hermitian
    exponential. On each two-dimensional invariant block W has eigenvalues
    exp(+-i arccos(E/lam)), both mapped to exp(-iEt); the signal block is
    therefore exp(-iHt) without any pairing of phases.
    """
    W = w.matrix
    herm = 0.5 * (W + W.conj().T)
    U = expm_hermitian(w.lcu.lam * herm, t)
    d = w.lcu.dim
    target = expm_hermitian(w.lcu.matrix(), t)
    resid = spectral_norm(signal_block(U, w.signal_state, d) - target)
    return BlockEncoding(U, w.ancilla_dim, 1.0, max(resid, 1e-15), w.signal_state)


def evolution_block(lcu: LcuDecomposition, t: float) -> tuple[np.ndarray, float]:
    """Signal block of the ideal encoding and its measured residual."""
    enc = ideal_evolution_encoding(walk_operator(lcu), t)
    return enc.block(), enc.epsilon


def select_prime(lcu: LcuDecomposition, frame: np.ndarray, t: float,
                 anc: Optional[int] = None) -> np.ndarray:
    """(I (x) e^{iFt}) SELECT (I (x) e^{-iFt}) for a diagonal frame generator F."""
    A = anc or ancilla_dim(lcu.L)
    S = select_matrix(lcu, A)
    V = expm_hermitian(frame, -t)
    big = np.kron(np.eye(A), V)
    return big @ S @ big.conj().T


def qubitization_query_cost(alpha: float, t: float, eps: float) -> int:
    """ceil(alpha|t| + ln(1/eps) / ln(e + ln(1/eps)/(alpha|t|))); alpha|t| = 0 gives ceil(ln(1/eps))."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    at = alpha * abs(t)
    le = math.log(1.0 / eps)
    if at == 0:
        return math.ceil(le)
    return math.ceil(at + le / math.log(math.e + le / at))
