"""Dense operator helpers: norms, Hermitian exponentials, time-ordered products."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


class ConvergenceError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""


def as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hermitian(A) -> np.ndarray:
    """Validate ``A`` as Hermitian and return its symmetrized copy."""
    A = as_square(A)
    # Frobenius norms keep this cheap for large matrices
    scale = max(np.linalg.norm(A), 1.0)
    skew = np.linalg.norm(A - A.conj().T)
    if skew > 1e-8 * scale:
        raise ValueError(f"matrix is not Hermitian (skew norm {skew:.3e})")
    return 0.5 * (A + A.conj().T)


def is_hermitian(A, rtol: float = HERMITIAN_RTOL) -> bool:
    A = np.asarray(A)
    return np.linalg.norm(A - A.conj().T, 2) <= rtol * max(np.linalg.norm(A, 2), 1.0)


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2) <= tol


def kron_all(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def pauli_string(label: str) -> np.ndarray:
    """Dense matrix for a Pauli word such as ``"XZI"`` (leftmost factor first)."""
    return kron_all(*(PAULIS[c] for c in label))


def embed(op: np.ndarray, site: int, dims: list[int]) -> np.ndarray:
    """Place ``op`` on tensor factor ``site`` of a register with local ``dims``."""
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = op
    return kron_all(*factors)


def schatten_norm(A, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}.

    :param A: square matrix
    :param p: 1 (trace norm), 2 (Frobenius) or ``np.inf`` / ``"inf"`` (spectral)
    """
    A = as_square(A)
    if p in (np.inf, "inf", "∞"):
        return float(np.linalg.norm(A, 2))
    if p == 2:
        return float(np.linalg.norm(A, "fro"))
    if p == 1:
        return float(np.sum(np.linalg.svd(A, compute_uv=False)))
    raise ValueError(f"unsupported Schatten index {p!r}")


def spectral_norm(A) -> float:
    return float(np.linalg.norm(A, 2))


def trace_norm_hermitian(A) -> float:
    """Trace norm of a Hermitian matrix via its eigenvalues (cheaper than an SVD)."""
    A = np.asarray(A)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))


def eigh_checked(H):
    w, V = np.linalg.eigh(H)
    resid = np.linalg.norm(H @ V - V * w, 2)
    if not np.isfinite(resid) or resid > 1e-8 * max(np.linalg.norm(H, 2), 1.0):
        raise ConvergenceError(f"eigendecomposition residual {resid:.3e}")
    return w, V


def expm_hermitian(H, t: float) -> np.ndarray:
    """Return exp(-i H t) computed from the eigendecomposition of ``H``."""
    H = hermitian(H)
    if t == 0:
        return np.eye(H.shape[0], dtype=complex)
    w, V = eigh_checked(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def polar_unitary(A) -> np.ndarray:
    """Closest unitary to ``A`` in any unitarily invariant norm."""
    U, _ = sla.polar(A)
    return U


@dataclass(frozen=True)
class TimeDependentHam:
    """Hermitian-valued function of time on a closed interval.

    ``norm_profile`` maps time to the spectral norm; when ``None`` it is
    computed directly from the evaluator.
    """

    evaluator: Callable[[float], np.ndarray]
    t0: float
    t1: float
    dim: int
    norm_profile: Optional[Callable[[float], float]] = None

    def __call__(self, tau: float) -> np.ndarray:
        return self.evaluator(tau)

    def norm(self, tau: float) -> float:
        if self.norm_profile is not None:
            return float(self.norm_profile(tau))
        return spectral_norm(self.evaluator(tau))

    def restrict(self, t0: float, t1: float) -> "TimeDependentHam":
        return TimeDependentHam(self.evaluator, t0, t1, self.dim, self.norm_profile)

    def check(self, n_samples: int = 7, rtol: float = 1e-8) -> None:
        """Assert Hermiticity, dimension and norm-profile agreement at sample times."""
        for tau in np.linspace(self.t0, self.t1, n_samples):
            H = np.asarray(self.evaluator(tau))
            if H.shape != (self.dim, self.dim):
                raise ValueError(f"evaluator returned shape {H.shape} at tau={tau}")
            if not is_hermitian(H, 1e-10):
                raise ValueError(f"evaluator not Hermitian at tau={tau}")
            direct = spectral_norm(H)
            if abs(self.norm(tau) - direct) > rtol * max(direct, 1e-300):
                raise ValueError(f"norm profile mismatch at tau={tau}")


def constant_ham(H0, t0: float = 0.0, t1: float = 1.0) -> TimeDependentHam:
    H0 = hermitian(H0)
    nrm = spectral_norm(H0)
    return TimeDependentHam(lambda tau: H0, t0, t1, H0.shape[0], lambda tau: nrm)


def midpoint_product(H: TimeDependentHam, t0: float, t1: float, n: int) -> np.ndarray:
    """Exponential midpoint rule with ``n`` equal steps; later times act on the left."""
    h = (t1 - t0) / n
    U = np.eye(H.dim, dtype=complex)
    for k in range(n):
        U = expm_hermitian(H(t0 + (k + 0.5) * h), h) @ U
    return U


def time_ordered_exp(H: TimeDependentHam, t0: float, t1: float, tol: float = 1e-10,
                     n0: int = 4, max_halvings: int = 14) -> np.ndarray:
    """Time-ordered exponential of -i∫H over [t0, t1].

    The midpoint rule is symmetric, so its error expands in even powers of the
    step. One Richardson step (4 U_{2n} - U_n)/3 removes the leading term; the
    step is halved until successive extrapolants agree to ``tol``. The result
    is projected back onto the unitary group.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t1 == t0:
        return np.eye(H.dim, dtype=complex)
    n = n0
    coarse = midpoint_product(H, t0, t1, n)
    fine = midpoint_product(H, t0, t1, 2 * n)
    prev = (4 * fine - coarse) / 3
    diff = np.inf
    for _ in range(max_halvings):
        n *= 2
        coarse, fine = fine, midpoint_product(H, t0, t1, 2 * n)
        cur = (4 * fine - coarse) / 3
        diff = spectral_norm(cur - prev)
        if diff < tol:
            return polar_unitary(cur)
        prev = cur
    raise ConvergenceError(f"time_ordered_exp did not converge (last change {diff:.3e})")
