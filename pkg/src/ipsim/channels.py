"""Quantum channels, Choi matrices and diamond-norm brackets.

Superoperators act on row-major vectorized density matrices, so that
vec(A rho B) = (A kron B^T) vec(rho).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linops import as_square, is_unitary, trace_norm_hermitian

MAX_BRANCHES = 4096


def unitary_superop(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    return np.kron(U, U.conj())


def mixed_superop(probs, unitaries) -> np.ndarray:
    Us = np.asarray(unitaries, dtype=complex)
    p = np.asarray(probs, dtype=float)
    d = Us.shape[-1]
    # sum_k p_k U_k (x) conj(U_k), built without materializing each Kronecker product
    S = np.einsum("k,kac,kbd->abcd", p, Us, Us.conj(), optimize=True)
    return S.reshape(d * d, d * d)


@dataclass(frozen=True)
class Channel:
    """A linear map on dim x dim matrices.

    ``kind`` is ``"unitary"`` (data = U), ``"mixed"`` (data = (probs, stacked
    unitaries)) or ``"superop"`` (data = dim^2 x dim^2 matrix). ``physical``
    is False for channel differences and other non-CPTP maps.
    """

    kind: str
    dim: int
    data: object
    physical: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def unitary(cls, U) -> "Channel":
        U = as_square(U)
        if not is_unitary(U, 1e-8):
            raise ValueError("operator is not unitary")
        return cls("unitary", U.shape[0], U)

    @classmethod
    def mixed_unitary(cls, probs: Sequence[float], unitaries) -> "Channel":
        p = np.asarray(probs, dtype=float)
        Us = np.asarray(unitaries, dtype=complex)
        if p.ndim != 1 or len(p) != len(Us) or len(p) == 0:
            raise ValueError("need one probability per unitary")
        if np.any(p < -1e-14) or abs(p.sum() - 1) > 1e-10:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        d = Us.shape[-1]
        if len(p) > MAX_BRANCHES:
            return cls("superop", d, mixed_superop(p, Us))
        return cls("mixed", d, (p, Us))

    @classmethod
    def from_superop(cls, S, physical: bool = True, check: bool = True) -> "Channel":
        S = as_square(S)
        d = int(round(np.sqrt(S.shape[0])))
        if d * d != S.shape[0]:
            raise ValueError("superoperator size must be a perfect square")
        ch = cls("superop", d, S, physical)
        if physical and check:
            ch.check_trace_preserving()
        return ch

    def superop(self) -> np.ndarray:
        if "S" not in self._cache:
            if self.kind == "unitary":
                S = unitary_superop(self.data)
            elif self.kind == "mixed":
                S = mixed_superop(*self.data)
            else:
                S = self.data
            self._cache["S"] = S
        return self._cache["S"]

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix sum_ij Phi(|i><j|) (x) |i><j|."""
        d = self.dim
        # S[(a,b),(i,j)] = <a|Phi(|i><j|)|b>; J[(a,i),(b,j)] = S[(a,b),(i,j)]
        return self.superop().reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state shape {rho.shape} does not match channel dim {self.dim}")
        if self.kind == "unitary":
            U = self.data
            return U @ rho @ U.conj().T
        if self.kind == "mixed":
            p, Us = self.data
            return np.einsum("k,kab,bc,kdc->ad", p, Us, rho, Us.conj(), optimize=True)
        return (self.data @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def then(self, other: "Channel") -> "Channel":
        """Channel that applies ``self`` first and ``other`` second."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if self.kind == "unitary" and other.kind == "unitary":
            return Channel("unitary", self.dim, other.data @ self.data)
        return Channel("superop", self.dim, other.superop() @ self.superop(),
                       self.physical and other.physical)

    def __sub__(self, other: "Channel") -> "Channel":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Channel("superop", self.dim, self.superop() - other.superop(), physical=False)

    def __mul__(self, c: float) -> "Channel":
        return Channel("superop", self.dim, c * self.superop(), physical=False)

    __rmul__ = __mul__

    def check_trace_preserving(self, tol: float = 1e-8) -> float:
        d = self.dim
        J = self.choi().reshape(d, d, d, d)
        # partial trace over the output factor must be the identity
        resid = np.linalg.norm(np.einsum("aiaj->ij", J) - np.eye(d), 2)
        if resid > tol:
            raise ValueError(f"channel is not trace preserving (residual {resid:.3e})")
        return float(resid)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    return 0.5 * trace_norm_hermitian(rho - sigma)


def diamond_bracket(phi: Channel) -> tuple[float, float]:
    """Lower and upper bounds on the diamond norm of a Hermiticity-preserving map.

    The lower value is the trace norm of the map applied to half of a maximally
    entangled state, ||J||_1 / dim; the upper value is ||J||_1.
    """
    J = phi.choi()
    nrm = trace_norm_hermitian(J)
    return nrm / phi.dim, nrm


def channel_error(approx: Channel, exact: Channel) -> tuple[float, float]:
    return diamond_bracket(approx - exact)


def depolarizing(dim: int, p: float = 1.0) -> Channel:
    """rho -> (1-p) rho + p Tr(rho) I/dim."""
    d = dim
    S_id = np.eye(d * d, dtype=complex)
    vI = np.eye(d).reshape(-1)
    S_dep = np.outer(vI, vI) / d
    return Channel.from_superop((1 - p) * S_id + p * S_dep)


def choi_frobenius_distance(a: Channel, b: Channel, normalized: bool = False) -> float:
    diff = np.linalg.norm(a.choi() - b.choi(), "fro")
    return float(diff / a.dim if normalized else diff)


def density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def superop_power(S: np.ndarray, r: int) -> np.ndarray:
    return np.linalg.matrix_power(S, r)


def compose_all(channels: Sequence[Channel], dim: Optional[int] = None) -> Channel:
    """Apply ``channels`` in list order (first element acts first)."""
    if not channels:
        if dim is None:
            raise ValueError("empty composition needs a dimension")
        return Channel("unitary", dim, np.eye(dim, dtype=complex))
    out = channels[0]
    for ch in channels[1:]:
        out = out.then(ch)
    return out
