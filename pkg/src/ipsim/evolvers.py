"""Elemental simulation protocols: exact, product formulas, continuous qDRIFT,
and the interaction-frame transformation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .channels import Channel, mixed_superop
from .linops import TimeDependentHam, eigh_checked, expm_hermitian, hermitian, spectral_norm
from .models import SumHamiltonian

DEFAULT_QUAD = 64
CDF_TABLE = 1024


@dataclass
class CostLedger:
    """Oracle-call counters. Counters only ever increase."""

    calls_Wk: dict = field(default_factory=dict)
    calls_Wl_frame: int = 0
    calls_prepare: int = 0
    calls_select: int = 0
    toffoli_estimate: int = 0

    def add_Wk(self, label, n: int = 1) -> None:
        if n < 0:
            raise ValueError("ledger counters are monotone")
        self.calls_Wk[label] = self.calls_Wk.get(label, 0) + int(n)

    def add(self, *, Wl: int = 0, prepare: int = 0, select: int = 0, toffoli: int = 0) -> None:
        if min(Wl, prepare, select, toffoli) < 0:
            raise ValueError("ledger counters are monotone")
        self.calls_Wl_frame += int(Wl)
        self.calls_prepare += int(prepare)
        self.calls_select += int(select)
        self.toffoli_estimate += int(toffoli)

    def merge(self, other: "CostLedger") -> "CostLedger":
        for k in sorted(other.calls_Wk, key=str):
            self.add_Wk(k, other.calls_Wk[k])
        self.add(Wl=other.calls_Wl_frame, prepare=other.calls_prepare,
                 select=other.calls_select, toffoli=other.toffoli_estimate)
        return self

    @property
    def total_Wk(self) -> int:
        return int(sum(self.calls_Wk.values()))

    def as_dict(self) -> dict:
        return {
            "calls_Wk": dict(sorted(self.calls_Wk.items(), key=lambda kv: str(kv[0]))),
            "calls_Wl_frame": self.calls_Wl_frame,
            "calls_prepare": self.calls_prepare,
            "calls_select": self.calls_select,
            "toffoli_estimate": self.toffoli_estimate,
        }


@dataclass(frozen=True)
class QdriftPlan:
    """Segment boundaries with equal norm mass, plus the cumulative-mass table."""

    boundaries: np.ndarray
    table_t: np.ndarray
    table_mass: np.ndarray
    total: float

    @property
    def r(self) -> int:
        return len(self.boundaries) - 1

    @property
    def segment_mass(self) -> float:
        return self.total / self.r

    def sample_time(self, k: int, u: float) -> float:
        """Inverse-CDF draw inside segment ``k`` for a uniform ``u`` in [0, 1)."""
        target = (k + u) * self.segment_mass
        return float(np.interp(target, self.table_mass, self.table_t))


def exact_evolution(H, t: float) -> np.ndarray:
    """exp(-i H t) for a SumHamiltonian or a matrix."""
    M = H.matrix() if isinstance(H, SumHamiltonian) else H
    return expm_hermitian(M, t)


# ---------------------------------------------------------------------------
# product formulas


def suzuki_weight(k: int) -> float:
    """Outer step weight of the order-2k recursion, 1/(4 - 4^(1/(2k-1)))."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _formula_sequence(L: int, order: int, dt: float) -> list[tuple[int, float]]:
    """(term index, duration) pairs in application order for one step."""
    if order == 1:
        return [(j, dt) for j in range(L)]
    if order == 2:
        half = [(j, dt / 2) for j in range(L - 1)]
        return half + [(L - 1, dt)] + half[::-1]
    if order % 2 or order < 2:
        raise ValueError("order must be 1 or an even integer")
    k = order // 2
    u = suzuki_weight(k)
    outer = _formula_sequence(L, order - 2, u * dt)
    inner = _formula_sequence(L, order - 2, (1 - 4 * u) * dt)
    return outer + outer + inner + outer + outer


def trotter_product(H: SumHamiltonian, t: float, r: int, order: int = 1):
    """[S_order(t/r)]^r with the first listed term applied first.

    Returns (unitary, ledger); the ledger counts one exponential call per
    factor, without merging adjacent factors.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    L = len(H)
    seq = _formula_sequence(L, order, t / r)
    eig = [eigh_checked(T) for T in H.terms]
    step = np.eye(H.dim, dtype=complex)
    ledger = CostLedger()
    for j, dur in seq:
        w, V = eig[j]
        step = ((V * np.exp(-1j * w * dur)) @ V.conj().T) @ step
    for j, _ in seq:
        ledger.add_Wk(H.labels[j], r)
    return np.linalg.matrix_power(step, r), ledger


def first_order_bound(H: SumHamiltonian, t: float, r: int) -> float:
    """Spectral-norm bound (t^2 / 2r) sum_p ||[H_p, sum_{q>p} H_q]|| for S_1."""
    return t * t / (2 * r) * nested_commutator_sum(H.terms)


def commutator_norm(A, B) -> float:
    C = A @ B - B @ A
    # i[A, B] is Hermitian for Hermitian A, B
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5j * (C - C.conj().T)))))


def nested_commutator_sum(terms) -> float:
    total = 0.0
    for p in range(len(terms) - 1):
        rest = sum(terms[p + 1:])
        total += commutator_norm(terms[p], rest)
    return total


# ---------------------------------------------------------------------------
# interaction frame


def _conjugator(F: np.ndarray, diagonal: bool):
    """Return tau -> (A -> e^{iF tau} A e^{-iF tau})."""
    if diagonal:
        f = np.real(np.diag(F))
        gap = f[:, None] - f[None, :]
        return lambda tau: (lambda A: A * np.exp(1j * gap * tau))
    w, V = eigh_checked(hermitian(F))
    gap = w[:, None] - w[None, :]

    def at(tau):
        return lambda A: V @ ((V.conj().T @ A @ V) * np.exp(1j * gap * tau)) @ V.conj().T
    return at


def _is_diag(M) -> bool:
    return np.max(np.abs(M - np.diag(np.diag(M))), initial=0.0) <= 1e-12


def interaction_frame(H: SumHamiltonian, frame_label, t0: float = 0.0,
                      t1: float = 1.0) -> TimeDependentHam:
    """tau -> e^{i H_l tau} (H - H_l) e^{-i H_l tau}; ``frame_label`` may name several terms."""
    F, rest = H.split_frame(frame_label)
    A = sum((H.term(lab) for lab in rest), np.zeros((H.dim, H.dim), complex))
    conj = _conjugator(F, _is_diag(F))
    nrm = spectral_norm(A)
    return TimeDependentHam(lambda tau: conj(tau)(A), t0, t1, H.dim, lambda tau: nrm)


def interaction_terms(H: SumHamiltonian, frame_label, t0: float = 0.0,
                      t1: float = 1.0) -> list[tuple[str, TimeDependentHam]]:
    """Per-term interaction-frame Hamiltonians for every non-frame term."""
    F, rest = H.split_frame(frame_label)
    conj = _conjugator(F, _is_diag(F))
    out = []
    for lab in rest:
        T = H.term(lab)
        nrm = spectral_norm(T)
        out.append((lab, TimeDependentHam(lambda tau, T=T: conj(tau)(T), t0, t1, H.dim,
                                          lambda tau, nrm=nrm: nrm)))
    return out


def frame_generator(H: SumHamiltonian, frame_label) -> np.ndarray:
    return H.split_frame(frame_label)[0]


def trotter_split_td(terms: list, t0: float, t1: float) -> list[TimeDependentHam]:
    """Restrict each labeled term to [t0, t1]; their time-ordered exponentials,
    applied in list order, approximate the joint time-ordered exponential."""
    return [h.restrict(t0, t1) for _, h in terms]


def trotter_split_bound(terms: list, t0: float, t1: float, grid: int = 9) -> float:
    """(1/2) sum_l max_{u,v} ||[H_l(u), sum_{q>l} H_q(v)]|| (t1-t0)^2, max over a grid."""
    taus = np.linspace(t0, t1, grid)
    hs = [h for _, h in terms]
    total = 0.0
    for l in range(len(hs) - 1):
        best = 0.0
        for u in taus:
            A = hs[l](u)
            for v in taus:
                B = sum(h(v) for h in hs[l + 1:])
                best = max(best, commutator_norm(A, B))
        total += best
    return 0.5 * total * (t1 - t0) ** 2


# ---------------------------------------------------------------------------
# continuous qDRIFT


def norm_integral(H: TimeDependentHam, t0: float, t1: float) -> float:
    val, _ = integrate.quad(H.norm, t0, t1, limit=200, epsabs=1e-13, epsrel=1e-12)
    return float(val)


def qdrift_nodes(H: TimeDependentHam, t0: float, t1: float, quad_points: int = DEFAULT_QUAD):
    """Gauss-Legendre mixture for one segment: (probabilities, unitaries, residual)."""
    if quad_points < 8:
        raise ValueError("quad_points must be >= 8")
    x, w = np.polynomial.legendre.leggauss(quad_points)
    half = 0.5 * (t1 - t0)
    taus = t0 + half * (x + 1)
    wts = half * w
    norms = np.array([H.norm(tau) for tau in taus])
    if np.any(norms <= 0):
        raise ValueError("norm profile vanishes inside the segment")
    total = norm_integral(H, t0, t1)
    probs = wts * norms / total
    resid = abs(probs.sum() - 1.0)
    probs = probs / probs.sum()
    Us = np.array([expm_hermitian(H(tau), total / n) for tau, n in zip(taus, norms)])
    return probs, Us, resid


def qdrift_channel_exact(H: TimeDependentHam, t0: float, t1: float,
                         quad_points: int = DEFAULT_QUAD, return_residual: bool = False):
    """Mixed-unitary channel sum_i w_i p(tau_i) e^{-i H(tau_i)/p(tau_i)} on one segment."""
    probs, Us, resid = qdrift_nodes(H, t0, t1, quad_points)
    ch = Channel.mixed_unitary(probs, Us)
    return (ch, resid) if return_residual else ch


def qdrift_plan(H: TimeDependentHam, t0: float, t1: float, r: int,
                table_points: int = CDF_TABLE) -> QdriftPlan:
    """Equal-norm-mass segmentation and a monotone cumulative-mass table."""
    if r < 1:
        raise ValueError("r must be >= 1")
    ts = np.linspace(t0, t1, table_points)
    norms = np.array([H.norm(tau) for tau in ts])
    if np.any(norms < 0):
        raise AssertionError("norm profile is negative")
    mass = np.concatenate([[0.0], np.cumsum(0.5 * (norms[1:] + norms[:-1]) * np.diff(ts))])
    if np.any(np.diff(mass) <= 0):
        raise ValueError("cumulative mass table is not strictly increasing")
    total = mass[-1]
    bounds = np.interp(np.linspace(0, total, r + 1), mass, ts)
    bounds[0], bounds[-1] = t0, t1
    return QdriftPlan(bounds, ts, mass, float(total))


def qdrift_channel_segments(H: TimeDependentHam, t0: float, t1: float, r: int,
                            quad_points: int = DEFAULT_QUAD, uniform: bool = False) -> Channel:
    """r-segment product of exact qDRIFT channels (earliest segment first)."""
    if uniform:
        bounds = np.linspace(t0, t1, r + 1)
    else:
        bounds = qdrift_plan(H, t0, t1, r).boundaries
    S = np.eye(H.dim ** 2, dtype=complex)
    for a, b in zip(bounds[:-1], bounds[1:]):
        probs, Us, _ = qdrift_nodes(H, a, b, quad_points)
        S = mixed_superop(probs, Us) @ S
    return Channel.from_superop(S, check=False)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for trajectory ``index``; independent of evaluation order."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def qdrift_sample(H: TimeDependentHam, t0: float, t1: float, r: int, seed: int,
                  trajectory: int = 0, plan: Optional[QdriftPlan] = None):
    """One sampled qDRIFT trajectory: (unitary, ledger with r oracle calls)."""
    plan = plan or qdrift_plan(H, t0, t1, r)
    rng = trajectory_rng(seed, trajectory)
    u = rng.random(plan.r)
    U = np.eye(H.dim, dtype=complex)
    for k in range(plan.r):
        tau = plan.sample_time(k, u[k])
        U = expm_hermitian(H(tau), plan.segment_mass / H.norm(tau)) @ U
    ledger = CostLedger()
    ledger.add_Wk("H", plan.r)
    return U, ledger


def qdrift_sampled_channel(H: TimeDependentHam, t0: float, t1: float, r: int, seed: int,
                           M: int, start: int = 0, batch: int = 512,
                           plan: Optional[QdriftPlan] = None) -> Channel:
    """Empirical channel averaged over trajectories start .. start+M-1.

    Trajectory i uses the same stream as ``qdrift_sample(..., trajectory=i)``;
    the exponentials are evaluated in batches with a stacked eigh.
    """
    plan = plan or qdrift_plan(H, t0, t1, r)
    d = H.dim
    acc = np.zeros((d, d, d, d), dtype=complex)
    for lo in range(start, start + M, batch):
        idx = range(lo, min(lo + batch, start + M))
        u = np.stack([trajectory_rng(seed, i).random(r) for i in idx])
        targets = (np.arange(r)[None, :] + u) * plan.segment_mass
        taus = np.interp(targets, plan.table_mass, plan.table_t)
        Hs = np.stack([np.asarray(H(tau), dtype=complex) for tau in taus.ravel()])
        Hs = 0.5 * (Hs + Hs.conj().transpose(0, 2, 1))
        w, V = np.linalg.eigh(Hs)
        if H.norm_profile is not None:
            norms = np.array([H.norm(tau) for tau in taus.ravel()])
        else:
            norms = np.abs(w).max(axis=1)
        dts = plan.segment_mass / norms
        Es = np.einsum("nij,nj,nkj->nik", V, np.exp(-1j * w * dts[:, None]), V.conj())
        Es = Es.reshape(len(idx), r, d, d)
        U = Es[:, 0]
        for k in range(1, r):
            U = Es[:, k] @ U
        acc += np.einsum("nac,nbd->abcd", U, U.conj())
    return Channel.from_superop(acc.reshape(d * d, d * d) / M, check=False)


def sampled_convergence(H: TimeDependentHam, t0: float, t1: float, r: int, seed: int,
                        Ms=(100, 1000, 10000), pool_batches: int = 32,
                        reference: Optional[Channel] = None) -> dict:
    """RMS Choi-Frobenius distance of M-trajectory averages from the exact channel.

    A pool of ``pool_batches * max(Ms)`` trajectories is cut into disjoint
    consecutive blocks of each size M; block averages nest, so the pool is
    sampled once.
    """
    from .channels import choi_frobenius_distance
    Ms = sorted(int(m) for m in Ms)
    base = Ms[0]
    if any(m % base for m in Ms):
        raise ValueError("every M must be a multiple of the smallest")
    E = reference or qdrift_channel_segments(H, t0, t1, r)
    n_base = pool_batches * Ms[-1] // base
    plan = qdrift_plan(H, t0, t1, r)
    blocks = [qdrift_sampled_channel(H, t0, t1, r, seed, base, start=j * base,
                                     plan=plan).superop()
              for j in range(n_base)]
    out = {}
    for m in Ms:
        k = m // base
        ds = []
        for j in range(0, n_base, k):
            S = sum(blocks[j:j + k]) / k
            ds.append(choi_frobenius_distance(Channel.from_superop(S, check=False), E))
        out[m] = float(np.sqrt(np.mean(np.square(ds))))
    return out
