"""Hybrid interaction-picture protocols.

All three protocols use uniform segments of length dt = t/r. Because the
interaction-frame terms satisfy H_I(s + j dt) = e^{iF j dt} H_I(s) e^{-iF j dt},
the r-segment interaction-frame channel, followed by the final frame
evolution e^{-iFt}, collapses to (G S)^r where S is the first-segment channel
and G is conjugation by e^{-iF dt}. ``compose_segments`` evaluates the same
channel segment by segment and is kept as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import Channel, diamond_bracket, mixed_superop, unitary_superop
from .evolvers import (CostLedger, DEFAULT_QUAD, commutator_norm, exact_evolution,
                       interaction_terms, trajectory_rng, trotter_product)
from .linops import expm_hermitian, spectral_norm
from .models import LcuDecomposition, NeutrinoParams, SumHamiltonian, build_neutrino
from .qubitization import evolution_block, qubitization_query_cost

DEFAULT_R_CAP = 10 ** 6


class SegmentCapError(ValueError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"required r = {required} exceeds cap {cap}")
        self.required = required
        self.cap = cap


@dataclass
class HybridResult:
    channel: Channel
    ledger: CostLedger
    r_used: int
    predicted_bound: float
    measured_error_bracket: tuple
    info: dict = field(default_factory=dict)

    @property
    def error_lower(self) -> float:
        return self.measured_error_bracket[0]


def commutator_constant(H: SumHamiltonian, frame_label) -> float:
    """sum over non-frame p of ||[H_p, sum_{q>p, q non-frame} H_q]||."""
    _, rest = H.split_frame(frame_label)
    terms = [H.term(lab) for lab in rest]
    total = 0.0
    for p in range(len(terms) - 1):
        total += commutator_norm(terms[p], sum(terms[p + 1:]))
    return total


def tq_segment_count(c_I: float, norms, t: float, eps: float, factor: float = 1.0) -> int:
    """ceil(factor * (t^2/eps) * (c_I + 4 sum ||H_k||^2))."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    val = factor * t * t / eps * (c_I + 4 * sum(n * n for n in norms))
    return max(1, math.ceil(val - 1e-12 * val))


def schwinger_segment_count(N: int, a: float, t: float, eps: float) -> int:
    """Segment count from the closed-form Schwinger constants: ceil(65 (N-1) t^2 / (128 a^2 eps))."""
    return math.ceil(65 * (N - 1) * t * t / (128 * a * a * eps) - 1e-12)


def schwinger_claimed_c_I(N: int, a: float) -> float:
    return (N - 1) / (128 * a * a)


def _check_cap(r: int, cap: int):
    if r > cap:
        raise SegmentCapError(r, cap)


def _frame_superop(F: np.ndarray, dt: float) -> np.ndarray:
    return unitary_superop(expm_hermitian(F, dt))


def _lab_channel(F: np.ndarray, dt: float, S: np.ndarray, r: int) -> Channel:
    step = _frame_superop(F, dt) @ S
    return Channel.from_superop(np.linalg.matrix_power(step, r), check=False)


def _exact_channel(H: SumHamiltonian, t: float) -> Channel:
    return Channel.unitary(exact_evolution(H, t))


def _nodes(dt: float, quad_points: int):
    x, w = np.polynomial.legendre.leggauss(quad_points)
    return 0.5 * dt * (x + 1), 0.5 * w


def _conjugated_mixture(F: np.ndarray, B: np.ndarray, dt: float, quad_points: int) -> np.ndarray:
    """Superoperator of sum_i w_i Ad(e^{iF tau_i} B e^{-iF tau_i}) over one segment.

    With a constant-norm interaction-frame term p = 1/dt, so every node uses
    the same duration dt and the quadrature weights are the probabilities.
    """
    taus, probs = _nodes(dt, quad_points)
    Vs = [expm_hermitian(F, -tau) for tau in taus]
    ops = np.array([V @ B @ V.conj().T for V in Vs])
    return mixed_superop(probs, ops)


def compose_segments(F: np.ndarray, blocks: list, t: float, r: int,
                     quad_points: int = DEFAULT_QUAD) -> Channel:
    """Segment-by-segment composition (reference route for the (G S)^r identity).

    ``blocks`` are per-term operators for duration dt, applied in list order
    inside each segment.
    """
    dt = t / r
    x, w = np.polynomial.legendre.leggauss(quad_points)
    d = F.shape[0]
    S = np.eye(d * d, dtype=complex)
    for j in range(r):
        taus = j * dt + 0.5 * dt * (x + 1)
        for B in blocks:
            ops = []
            for tau in taus:
                V = expm_hermitian(F, -tau)
                ops.append(V @ B @ V.conj().T)
            S = mixed_superop(0.5 * w, np.array(ops)) @ S
    S = _frame_superop(F, t) @ S
    return Channel.from_superop(S, check=False)


def _prepare(H: SumHamiltonian, frame_label, t, eps, r, r_cap, factor):
    F, rest = H.split_frame(frame_label)
    norms = [spectral_norm(H.term(lab)) for lab in rest]
    c_I = commutator_constant(H, frame_label)
    if r is None:
        r = tq_segment_count(c_I, norms, t, eps, factor) if rest else 1
    _check_cap(r, r_cap)
    return F, rest, norms, c_I, r


def trotter_qdrift_ip(H: SumHamiltonian, frame_label, t: float, eps: Optional[float] = None,
                      mode: str = "exact", seed: int = 0, M: int = 1000,
                      r: Optional[int] = None, r_cap: int = DEFAULT_R_CAP,
                      quad_points: int = DEFAULT_QUAD) -> HybridResult:
    """Interaction-frame Trotter splitting with per-term continuous qDRIFT.

    ``mode`` is ``"exact"`` (compose quadrature mixtures) or ``"sampled"``
    (average ``M`` trajectories drawn from streams derived from ``seed``).
    ``r`` overrides the prescribed segment count.
    """
    if r is None and eps is None:
        raise ValueError("need eps or an explicit r")
    F, rest, norms, c_I, r = _prepare(H, frame_label, t, eps, r, r_cap, 1.0)
    dt = t / r
    blocks = [expm_hermitian(H.term(lab), dt) for lab in rest]
    d = H.dim
    if mode == "exact":
        S = np.eye(d * d, dtype=complex)
        for B in blocks:
            S = _conjugated_mixture(F, B, dt, quad_points) @ S
        channel = _lab_channel(F, dt, S, r)
    elif mode == "sampled":
        channel = _sampled_tq(F, blocks, t, r, seed, M)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ledger = CostLedger()
    for lab in rest:
        ledger.add_Wk(lab, r)
    ledger.add(Wl=2 * r * len(rest) + 1)
    bound = t * t / r * (c_I + 4 * sum(n * n for n in norms))
    bracket = diamond_bracket(channel - _exact_channel(H, t))
    return HybridResult(channel, ledger, r, bound, bracket,
                        {"c_I": c_I, "norms": norms, "mode": mode})


def _sampled_tq(F, blocks, t, r, seed, M) -> Channel:
    dt = t / r
    d = F.shape[0]
    final = expm_hermitian(F, t)
    acc = np.zeros((d, d, d, d), dtype=complex)
    for i in range(M):
        rng = trajectory_rng(seed, i)
        u = rng.random((r, len(blocks)))
        U = np.eye(d, dtype=complex)
        for j in range(r):
            for k, B in enumerate(blocks):
                V = expm_hermitian(F, -(j + u[j, k]) * dt)
                U = V @ B @ V.conj().T @ U
        U = final @ U
        acc += np.einsum("ac,bd->abcd", U, U.conj())
    return Channel.from_superop(acc.reshape(d * d, d * d) / M, check=False)


def _lcu_for(H: SumHamiltonian, labels) -> Optional[LcuDecomposition]:
    out = None
    for lab in labels:
        if lab not in H.lcus:
            raise ValueError(f"term {lab!r} has no LCU decomposition")
        out = H.lcus[lab] if out is None else out.concat(H.lcus[lab])
    return out


def qdrift_qubitization_ip(H: SumHamiltonian, frame_label, t: float, eps: float,
                           r: Optional[int] = None, r_cap: int = DEFAULT_R_CAP,
                           quad_points: int = DEFAULT_QUAD) -> HybridResult:
    """Continuous qDRIFT in the frame of ``frame_label`` with each segment's
    evolution under the remaining terms taken from an ideal walk transform."""
    F, rest = H.split_frame(frame_label)
    d = H.dim
    ledger = CostLedger()
    H_alpha = sum((H.term(lab) for lab in rest), np.zeros((d, d), complex))
    na = spectral_norm(H_alpha)
    if not rest or na == 0:
        U = expm_hermitian(F, t)
        ledger.add(Wl=1)
        ch = Channel.unitary(U)
        return HybridResult(ch, ledger, 0, eps, diamond_bracket(ch - _exact_channel(H, t)),
                            {"lambda_alpha": 0.0})
    lcu = _lcu_for(H, rest)
    if r is None:
        r = max(1, math.ceil(8 * t * t * na * na / eps - 1e-12))
    _check_cap(r, r_cap)
    dt = t / r
    delta = eps / (2 * r)
    B, resid = evolution_block(lcu, dt)
    S = _conjugated_mixture(F, B, dt, quad_points)
    channel = _lab_channel(F, dt, S, r)
    q = qubitization_query_cost(lcu.lam, dt, delta)
    ledger.add(select=r * q, prepare=2 * r * q, Wl=2 * r + 1)
    bracket = diamond_bracket(channel - _exact_channel(H, t))
    return HybridResult(channel, ledger, r, eps, bracket,
                        {"lambda_alpha": lcu.lam, "delta": delta, "block_residual": resid,
                         "queries_per_segment": q,
                         "qdrift_bound": 4 * t * t * na * na / r})


def trotter_qdrift_qubitization_ip(H: SumHamiltonian, frame_label, t: float, eps: float,
                                   r: Optional[int] = None, r_cap: int = DEFAULT_R_CAP,
                                   quad_points: int = DEFAULT_QUAD) -> HybridResult:
    """Trotter splitting of the frame terms, continuous qDRIFT per term, and an
    ideal walk transform for each sampled exponential."""
    F, rest, norms, c_I, r = _prepare(H, frame_label, t, eps, r, r_cap, 2.0)
    d = H.dim
    dt = t / r
    L = max(1, len(rest))
    delta = eps / (2 * r * L)
    ledger = CostLedger()
    S = np.eye(d * d, dtype=complex)
    lam_alpha = 0.0
    residual = 0.0
    for lab in rest:
        lcu = _lcu_for(H, [lab])
        B, resid = evolution_block(lcu, dt)
        residual = max(residual, resid)
        S = _conjugated_mixture(F, B, dt, quad_points) @ S
        q = qubitization_query_cost(lcu.lam, dt, delta)
        ledger.add_Wk(lab, r)
        ledger.add(select=r * q, prepare=2 * r * q)
        lam_alpha += lcu.lam
    ledger.add(Wl=2 * r * len(rest) + 1)
    channel = _lab_channel(F, dt, S, r)
    bracket = diamond_bracket(channel - _exact_channel(H, t))
    return HybridResult(channel, ledger, r, eps, bracket,
                        {"c_I": c_I, "lambda_alpha": lam_alpha, "delta": delta, "L": len(rest),
                         "block_residual": residual,
                         "tq_bound": t * t / r * (c_I + 4 * sum(n * n for n in norms))})


def neutrino_lab_vs_ip_error(p: NeutrinoParams, t: float, r: int,
                             quad_points: int = DEFAULT_QUAD) -> tuple[float, float]:
    """(lab-frame first-order Trotter error, matter-frame hybrid error) at r segments.

    Both are Choi lower brackets against the exact channel so that the two
    numbers are directly comparable.
    """
    if p.N > 8:
        raise ValueError("neutrino comparison is limited to N <= 8")
    H = build_neutrino(p)
    U, _ = trotter_product(H, t, r, order=1)
    lab = diamond_bracket(Channel.unitary(U) - _exact_channel(H, t))[0]
    ip = trotter_qdrift_ip(H, "H_matter", t, r=r, quad_points=quad_points).error_lower
    return lab, ip
