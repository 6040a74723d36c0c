"""Hamiltonian builders: lattice Schwinger, collective neutrinos, penalty dynamics."""
from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence
from typing import Optional

import numpy as np

from .linops import (I2, X, Y, Z, TimeDependentHam, embed, hermitian, is_unitary,
                     kron_all, pauli_string, spectral_norm)

DEFAULT_DIM_CAP = 16384
NEUTRINO_CAP = 12


class DimensionCapError(ValueError):
    pass


class KronTerms(Sequence):
    """Lazily materialized list of operators ``coef * kron(factors)``."""

    def __init__(self, items):
        self.items = list(items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return KronTerms(self.items[k])
        coef, factors = self.items[k]
        return coef * kron_all(*factors)

    def take(self, idx) -> "KronTerms":
        return KronTerms([self.items[j] for j in idx])

    @property
    def shape(self):
        d = int(np.prod([f.shape[0] for f in self.items[0][1]]))
        return (len(self.items), d, d)


@dataclass(frozen=True)
class LcuDecomposition:
    """H = sum_l w_l U_l with positive weights.

    ``unitaries`` is a stacked array or a lazy ``KronTerms`` list (whose
    entries are unitary by construction: phases times Kronecker products of
    unitary factors). ``adjoint_index`` optionally maps each term to the
    index of its adjoint term; it is required when some U_l is not
    self-inverse so that SELECT can be built as a reflection.
    """

    weights: np.ndarray
    unitaries: object
    adjoint_index: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.unitaries):
            raise ValueError("need one weight per unitary")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not isinstance(self.unitaries, KronTerms):
            Us = np.asarray(self.unitaries, dtype=complex)
            for U in Us:
                if not is_unitary(U):
                    raise ValueError("LCU term is not unitary")
            object.__setattr__(self, "unitaries", Us)
        object.__setattr__(self, "weights", w)
        if self.adjoint_index is not None:
            object.__setattr__(self, "adjoint_index", np.asarray(self.adjoint_index, dtype=int))

    @property
    def lam(self) -> float:
        return float(np.sum(self.weights))

    @property
    def L(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[-1]

    def dense_unitaries(self) -> np.ndarray:
        if isinstance(self.unitaries, KronTerms):
            return np.array([U for U in self.unitaries])
        return self.unitaries

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for w, U in zip(self.weights, self.unitaries):
            out += w * U
        return out

    def self_inverse(self) -> bool:
        return all(np.allclose(U @ U, np.eye(self.dim), atol=1e-12) for U in self.unitaries)

    def concat(self, other: "LcuDecomposition") -> "LcuDecomposition":
        adj = None
        if self.adjoint_index is not None or other.adjoint_index is not None:
            a = self.adjoint_index if self.adjoint_index is not None else _identity_pairing(self)
            b = other.adjoint_index if other.adjoint_index is not None else _identity_pairing(other)
            adj = np.concatenate([a, b + self.L])
        return LcuDecomposition(np.concatenate([self.weights, other.weights]),
                                np.concatenate([self.dense_unitaries(), other.dense_unitaries()]),
                                adj)

    def subset(self, idx) -> "LcuDecomposition":
        idx = list(idx)
        adj = None
        if self.adjoint_index is not None:
            pos = {j: k for k, j in enumerate(idx)}
            adj = np.array([pos[self.adjoint_index[j]] for j in idx])
        Us = self.unitaries.take(idx) if isinstance(self.unitaries, KronTerms) else self.unitaries[idx]
        return LcuDecomposition(self.weights[idx], Us, adj)


def _identity_pairing(lcu: LcuDecomposition) -> np.ndarray:
    if not lcu.self_inverse():
        raise ValueError("LCU terms are not self-inverse and no adjoint pairing was given")
    return np.arange(lcu.L)


@dataclass
class SumHamiltonian:
    """Ordered labeled Hermitian terms with fast-forward flags and optional LCUs."""

    labels: list
    terms: list
    fast_forward: list
    lcus: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.labels) == len(self.terms) == len(self.fast_forward)):
            raise ValueError("labels, terms and flags must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate term labels")
        self.terms = [hermitian(T) for T in self.terms]
        dims = {T.shape[0] for T in self.terms}
        if len(dims) != 1:
            raise ValueError("all terms must share one dimension")
        for lab, T, ff in zip(self.labels, self.terms, self.fast_forward):
            if ff and np.max(np.abs(T - np.diag(np.diag(T))), initial=0.0) > 1e-12:
                raise ValueError(f"fast-forward term {lab!r} is not diagonal")

    @classmethod
    def from_terms(cls, items, fast_forward=None, lcus=None) -> "SumHamiltonian":
        items = list(items)
        ff = fast_forward if fast_forward is not None else [False] * len(items)
        return cls([a for a, _ in items], [b for _, b in items], list(ff), dict(lcus or {}))

    @property
    def dim(self) -> int:
        return self.terms[0].shape[0]

    def __len__(self):
        return len(self.terms)

    def matrix(self) -> np.ndarray:
        return sum(self.terms)

    def term(self, label) -> np.ndarray:
        return self.terms[self.index(label)]

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown term label {label!r}") from None

    def split_frame(self, frame) -> tuple[np.ndarray, list]:
        """Return (frame generator, remaining labels) for a label or tuple of labels."""
        frame_labels = _as_labels(frame)
        for f in frame_labels:
            self.index(f)
        gen = sum((self.term(f) for f in frame_labels), np.zeros((self.dim, self.dim), complex))
        rest = [lab for lab in self.labels if lab not in frame_labels]
        return gen, rest

    def frame_is_diagonal(self, frame) -> bool:
        return all(self.fast_forward[self.index(f)] for f in _as_labels(frame))

    def replace(self, label, new_items, lcus=None) -> "SumHamiltonian":
        """Return a copy with term ``label`` replaced by ``new_items``."""
        k = self.index(label)
        labels = self.labels[:k] + [a for a, _ in new_items] + self.labels[k + 1:]
        terms = self.terms[:k] + [b for _, b in new_items] + self.terms[k + 1:]
        ff = self.fast_forward[:k] + [False] * len(new_items) + self.fast_forward[k + 1:]
        new_lcus = {key: v for key, v in self.lcus.items() if key != label}
        new_lcus.update(lcus or {})
        return SumHamiltonian(labels, terms, ff, new_lcus)

    def with_term(self, label, T, fast_forward=False) -> "SumHamiltonian":
        return SumHamiltonian(self.labels + [label], self.terms + [T],
                              self.fast_forward + [fast_forward], dict(self.lcus))


def _as_labels(frame) -> tuple:
    if isinstance(frame, str):
        return (frame,)
    return tuple(frame)


# ---------------------------------------------------------------------------
# Schwinger model


@dataclass(frozen=True)
class SchwingerParams:
    N: int
    Lambda: int
    a: float = 1.0
    g: float = 1.0
    m: float = 0.5
    boundary: str = "open"

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.Lambda < 1:
            raise ValueError("Lambda must be a positive integer")
        if self.a <= 0 or self.g <= 0 or self.m < 0:
            raise ValueError("need a > 0, g > 0, m >= 0")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")

    @property
    def n_links(self) -> int:
        return self.N - 1 if self.boundary == "open" else self.N

    @property
    def link_dim(self) -> int:
        return 2 * self.Lambda + 1

    @property
    def dim(self) -> int:
        return 2 ** self.N * self.link_dim ** self.n_links


def electric_field(Lambda: int) -> np.ndarray:
    return np.diag(np.arange(-Lambda, Lambda + 1)).astype(complex)


def link_raise(Lambda: int) -> np.ndarray:
    """Cyclic raising operator |e+1><e| on the (2*Lambda+1)-level link; wraps at the top."""
    return np.roll(np.eye(2 * Lambda + 1, dtype=complex), 1, axis=0)


def _check_schwinger(p: SchwingerParams, cap: int, allow_odd: bool):
    if p.N % 2 and not allow_odd:
        raise ValueError("N must be even for the staggered-fermion Schwinger model")
    if p.dim > cap:
        raise DimensionCapError(f"Schwinger dimension {p.dim} exceeds cap {cap}")


def _schwinger_dims(p: SchwingerParams) -> list[int]:
    return [2] * p.N + [p.link_dim] * p.n_links


def _hopping_pieces(p: SchwingerParams):
    """Yield (link index, weight, phase, factors, adjoint offset) for the hopping LCU.

    Per link r the eight unitaries are U XX, U YY, U^dag XX, U^dag YY,
    iU XY, -iU YX, -iU^dag XY, iU^dag YX, each with weight 1/(8a). The
    adjoint offset is the position (within the link block) of the adjoint
    term. The wrap-around link of a periodic chain carries no parity string.
    """
    dims = _schwinger_dims(p)
    Ur = link_raise(p.Lambda)
    Urd = Ur.conj().T
    w = 1.0 / (8 * p.a)
    recipe = [(1, Ur, X, X), (1, Ur, Y, Y), (1, Urd, X, X), (1, Urd, Y, Y),
              (1j, Ur, X, Y), (-1j, Ur, Y, X), (-1j, Urd, X, Y), (1j, Urd, Y, X)]
    adj = [2, 3, 0, 1, 6, 7, 4, 5]
    for r in range(p.n_links):
        s1, s2 = r, (r + 1) % p.N
        for k, (phase, link_op, A, B) in enumerate(recipe):
            factors = [np.eye(d, dtype=complex) for d in dims]
            factors[s1] = A
            factors[s2] = B
            factors[p.N + r] = link_op
            yield r, w, phase, factors, adj[k]


def lcu_of_hopping(p: SchwingerParams, links: Optional[Sequence[int]] = None,
                   cap: int = DEFAULT_DIM_CAP, allow_odd: bool = False) -> LcuDecomposition:
    """LCU of the hopping term: 8 unitaries of weight 1/(8a) per link."""
    _check_schwinger(p, cap, allow_odd)
    ws, items, adj = [], [], []
    for r, w, phase, factors, a in _hopping_pieces(p):
        if links is not None and r not in links:
            continue
        base = len(ws) - (len(ws) % 8)
        ws.append(w)
        items.append((phase, factors))
        adj.append(base + a)
    if not ws:
        raise ValueError("no hopping links selected")
    return LcuDecomposition(np.array(ws), KronTerms(items), np.array(adj))


def build_schwinger(p: SchwingerParams, cap: int = DEFAULT_DIM_CAP,
                    allow_odd: bool = False) -> SumHamiltonian:
    """Terms H_E, H_M, H_h on sites (x) links; H_E and H_M are diagonal.

    ``allow_odd`` lifts the even-N requirement for studies that do not rely
    on a neutral vacuum (e.g. commutator scaling).
    """
    _check_schwinger(p, cap, allow_odd)
    dims = _schwinger_dims(p)
    E = electric_field(p.Lambda)
    E2 = E @ E
    H_E = (p.g ** 2 * p.a / 2) * sum(embed(E2, p.N + r, dims) for r in range(p.n_links))
    # sites are numbered from 1 in the staggering sign (-1)^(r+1)
    H_M = (p.m / 2) * sum((-1) ** s * embed(Z, s, dims) for s in range(p.N))
    lcu = lcu_of_hopping(p, cap=cap, allow_odd=allow_odd)
    H_h = lcu.matrix()
    return SumHamiltonian(["H_E", "H_M", "H_h"], [H_E, H_M, H_h], [True, True, False],
                          {"H_h": lcu})


def split_hopping(H: SumHamiltonian, p: SchwingerParams,
                  allow_odd: bool = False) -> SumHamiltonian:
    """Replace H_h with H_h_odd + H_h_even (links 1, 3, ... and 2, 4, ... counted from 1)."""
    odd_links = [r for r in range(p.n_links) if r % 2 == 0]
    even_links = [r for r in range(p.n_links) if r % 2 == 1]
    items, lcus = [], {}
    for lab, links in (("H_h_odd", odd_links), ("H_h_even", even_links)):
        if links:
            lcu = lcu_of_hopping(p, links, allow_odd=allow_odd)
            lcus[lab] = lcu
            items.append((lab, lcu.matrix()))
    return H.replace("H_h", items, lcus)


def gauss_operators(p: SchwingerParams) -> list[np.ndarray]:
    """Diagonals of G(s) = E(s) - E(s-1) - q(s) for each site (open boundary).

    Occupation of a site is the qubit state |1>. Sites counted from 1:
    even sites carry charge +1 when occupied, odd sites -1 when empty.
    """
    if p.boundary != "open":
        raise NotImplementedError("Gauss law is implemented for open boundaries only")
    dims = _schwinger_dims(p)
    occ = np.array([0.0, 1.0])
    E = np.arange(-p.Lambda, p.Lambda + 1, dtype=float)

    def diag_on(vec, k):
        out = np.ones(1)
        for j, d in enumerate(dims):
            out = np.kron(out, vec if j == k else np.ones(d))
        return out

    Gs = []
    for s in range(p.N):
        site_no = s + 1
        n = diag_on(occ, s)
        q = n if site_no % 2 == 0 else n - 1.0
        right = diag_on(E, p.N + s) if s < p.n_links else 0.0
        left = diag_on(E, p.N + s - 1) if s >= 1 else 0.0
        Gs.append(right - left - q)
    return Gs


def gauss_projector(p: SchwingerParams, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Projector onto the joint kernel of the site Gauss operators."""
    if p.dim > cap:
        raise DimensionCapError(f"Schwinger dimension {p.dim} exceeds cap {cap}")
    mask = np.ones(p.dim, dtype=bool)
    for G in gauss_operators(p):
        mask &= np.abs(G) < 0.5
    return np.diag(mask.astype(complex))


# ---------------------------------------------------------------------------
# Collective neutrinos


@dataclass(frozen=True)
class NeutrinoParams:
    N: int
    omegas: tuple
    theta: float
    lambda_e: float
    mu: float
    J: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        om = tuple(float(w) for w in np.broadcast_to(np.asarray(self.omegas, float), (self.N,)))
        object.__setattr__(self, "omegas", om)
        J = np.ones((self.N, self.N)) - np.eye(self.N) if self.J is None else np.asarray(self.J, float)
        if J.shape != (self.N, self.N):
            raise ValueError("J must be N x N")
        if not np.allclose(J, J.T, atol=1e-12):
            raise ValueError("J must be symmetric")
        if np.any(np.abs(np.diag(J)) > 1e-12):
            raise ValueError("J must have zero diagonal")
        if np.any(J < 0) or np.any(J > 2):
            raise ValueError("J entries must lie in [0, 2]")
        object.__setattr__(self, "J", J)

    def replace(self, **kw) -> "NeutrinoParams":
        d = dict(N=self.N, omegas=self.omegas, theta=self.theta, lambda_e=self.lambda_e,
                 mu=self.mu, J=self.J)
        d.update(kw)
        return NeutrinoParams(**d)


def _single(op, i, N):
    return embed(op, i, [2] * N)


def _nu_nu(p: NeutrinoParams) -> np.ndarray:
    N = p.N
    H = np.zeros((2 ** N, 2 ** N), dtype=complex)
    for i in range(N):
        for j in range(i + 1, N):
            if p.J[i, j] == 0:
                continue
            for P in (X, Y, Z):
                H += p.J[i, j] * _single(P, i, N) @ _single(P, j, N)
    return (p.mu / (2 * N)) * H


def build_neutrino(p: NeutrinoParams, cap: int = NEUTRINO_CAP) -> SumHamiltonian:
    """Terms H_vac, H_matter (diagonal) and H_nu_nu."""
    if p.N > cap:
        raise DimensionCapError(f"N={p.N} exceeds neutrino cap {cap}")
    N = p.N
    s2, c2 = np.sin(2 * p.theta), np.cos(2 * p.theta)
    H_vac = sum((w / 2) * (s2 * _single(X, i, N) - c2 * _single(Z, i, N))
                for i, w in enumerate(p.omegas))
    H_mat = (p.lambda_e / 2) * sum(_single(Z, i, N) for i in range(N))
    return SumHamiltonian(["H_vac", "H_matter", "H_nu_nu"], [H_vac, H_mat, _nu_nu(p)],
                          [False, True, False])


def neutrino_ip_ham(p: NeutrinoParams, t0: float = 0.0, t1: float = 1.0) -> TimeDependentHam:
    """Rotating-frame Hamiltonian with respect to the matter term (closed form)."""
    N = p.N
    s2, c2 = np.sin(2 * p.theta), np.cos(2 * p.theta)
    Xs = sum((w / 2) * _single(X, i, N) for i, w in enumerate(p.omegas))
    Ys = sum((w / 2) * _single(Y, i, N) for i, w in enumerate(p.omegas))
    Zs = sum((w / 2) * _single(Z, i, N) for i, w in enumerate(p.omegas))
    Hnn = _nu_nu(p)
    lam = p.lambda_e

    def H(tau):
        return s2 * (np.cos(lam * tau) * Xs - np.sin(lam * tau) * Ys) - c2 * Zs + Hnn

    nrm = spectral_norm(H(0.0))
    return TimeDependentHam(H, t0, t1, 2 ** N, lambda tau: nrm)


# ---------------------------------------------------------------------------
# Penalty dynamics


def check_projector(P, tol: float = 1e-10) -> np.ndarray:
    P = hermitian(P)
    if np.linalg.norm(P @ P - P, 2) > tol:
        raise ValueError("operator is not idempotent")
    ev = np.linalg.eigvalsh(P)
    if np.any(np.minimum(np.abs(ev), np.abs(ev - 1)) > 1e-8):
        raise ValueError("projector eigenvalues must be 0 or 1")
    return P


@dataclass(frozen=True)
class PenaltySystem:
    H_f: np.ndarray
    P_c: np.ndarray
    lambda_pen: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "H_f", hermitian(self.H_f))
        object.__setattr__(self, "P_c", check_projector(self.P_c))
        if self.lambda_pen < 0:
            raise ValueError("lambda_pen must be nonnegative")

    def with_lambda(self, lam: float) -> "PenaltySystem":
        return PenaltySystem(self.H_f, self.P_c, lam)


def build_penalty(H_f, P_c, lambda_pen: float) -> SumHamiltonian:
    """Two-term Hamiltonian {H_f, lambda_pen * P_c}."""
    P_c = check_projector(P_c)
    diag = np.max(np.abs(P_c - np.diag(np.diag(P_c))), initial=0.0) <= 1e-12
    return SumHamiltonian(["H_f", "penalty"], [H_f, lambda_pen * P_c], [False, bool(diag)])


# ---------------------------------------------------------------------------
# Random instances


def random_pauli_lcu(n_qubits: int, n_terms: int, rng: np.random.Generator,
                     alphabet: str = "IXYZ", scale: float = 1.0) -> LcuDecomposition:
    """Random positive-weight combination of Pauli words (phases absorbed as signs)."""
    ws, Us = [], []
    for _ in range(n_terms):
        word = "".join(rng.choice(list(alphabet), size=n_qubits))
        sign = rng.choice([-1.0, 1.0])
        ws.append(scale * rng.uniform(0.1, 1.0))
        Us.append(sign * pauli_string(word))
    return LcuDecomposition(np.array(ws), np.array(Us))


def random_sum_hamiltonian(n_qubits: int, n_terms: int, rng: np.random.Generator,
                           paulis_per_term: int = 3, diagonal_frame: bool = True) -> SumHamiltonian:
    """Random Hamiltonian whose first term is diagonal (Z-type) when ``diagonal_frame``."""
    labels, terms, ff, lcus = [], [], [], {}
    for k in range(n_terms):
        alphabet = "IZ" if (k == 0 and diagonal_frame) else "IXYZ"
        lcu = random_pauli_lcu(n_qubits, paulis_per_term, rng, alphabet)
        lab = f"H{k}"
        labels.append(lab)
        terms.append(lcu.matrix())
        ff.append(k == 0 and diagonal_frame)
        lcus[lab] = lcu
    return SumHamiltonian(labels, terms, ff, lcus)


def pauli_sum(coeffs: dict) -> np.ndarray:
    return sum(c * pauli_string(w) for w, c in coeffs.items())


__all__ = [
    "LcuDecomposition", "SumHamiltonian", "SchwingerParams", "NeutrinoParams", "PenaltySystem",
    "build_schwinger", "lcu_of_hopping", "split_hopping", "gauss_projector", "gauss_operators",
    "build_neutrino", "neutrino_ip_ham", "build_penalty", "random_sum_hamiltonian",
    "random_pauli_lcu", "electric_field", "link_raise", "DimensionCapError", "I2", "kron_all",
]
