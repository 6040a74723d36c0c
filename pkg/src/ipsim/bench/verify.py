"""Verification suites: each check records what it tests, the measured value,
the bound it is held to, and whether it passed."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from ..channels import Channel, diamond_bracket
from ..constraints import ConstraintExperiment, gauss_filtered_hybrid, min_lambda
from ..evolvers import (exact_evolution, interaction_frame, qdrift_channel_segments,
                        sampled_convergence, trotter_product)
from ..hybrid import (commutator_constant, neutrino_lab_vs_ip_error, qdrift_qubitization_ip,
                      schwinger_claimed_c_I, schwinger_segment_count, trotter_qdrift_ip,
                      trotter_qdrift_qubitization_ip)
from ..linops import I2, X, Y, Z, TimeDependentHam, expm_hermitian, schatten_norm, spectral_norm
from ..models import (NeutrinoParams, PenaltySystem, SchwingerParams, build_neutrino,
                      build_schwinger, lcu_of_hopping, neutrino_ip_ham, random_pauli_lcu,
                      random_sum_hamiltonian, split_hopping)
from ..qubitization import prepared_state, select_matrix, signal_block, walk_operator
from ..resources import gate_complexity_report, method_queries, toffoli_prepare, toffoli_select

SUITES: dict = {}


@dataclass
class Check:
    name: str
    anchor: str
    measured: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.measured


def suite(name: str):
    def deco(fn: Callable):
        SUITES[name] = fn
        return fn
    return deco


def le(name, anchor, measured, bound) -> Check:
    return Check(name, anchor, float(measured), float(bound), bool(measured <= bound))


def eq(name, anchor, measured, expected) -> Check:
    ok = measured == expected
    return Check(name, anchor, float(measured), float(expected), bool(ok))


def slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@suite("norms")
def _norms(tol, seed):
    rng = np.random.default_rng(seed)
    out = [eq("||Z||_inf", "Schatten norms", schatten_norm(Z, np.inf), 1.0),
           eq("||Z||_1", "Schatten norms", schatten_norm(Z, 1), 2.0)]
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    n_inf, n_2, n_1 = (schatten_norm(A, p) for p in (np.inf, 2, 1))
    out.append(le("spectral <= Frobenius <= trace", "Schatten norm ordering",
                  max(n_inf - n_2, n_2 - n_1), 0.0))
    Q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    dev = max(abs(schatten_norm(Q @ A @ Q.conj().T, p) - schatten_norm(A, p)) for p in (1, 2, np.inf))
    out.append(le("unitary invariance", "Schatten norm invariance", dev, max(tol, 1e-9)))
    Hm = A + A.conj().T
    lhs = Q @ expm_hermitian(Hm, 1.0) @ Q.conj().T
    dev = spectral_norm(lhs - expm_hermitian(Q @ Hm @ Q.conj().T, 1.0))
    out.append(le("conjugation of exponentials", "V e^A V^dag = e^{V A V^dag}", dev, max(tol, 1e-9)))
    lo, hi = diamond_bracket(Channel.unitary(np.eye(2)) - Channel.unitary(X))
    out.append(le("bracket(I - X) = (2, 4)", "Choi diamond bracket", abs(lo - 2) + abs(hi - 4), 1e-12))
    return out


def _schwinger_ip(N=2, Lam=1):
    p = SchwingerParams(N, Lam, 1.0, 1.0, 0.5)
    return p, build_schwinger(p)


@suite("qdrift_bounds")
def _qdrift(tol, seed):
    p, H = _schwinger_ip()
    t = 1.0
    HI = interaction_frame(H, ("H_E", "H_M"), 0, t)
    F = H.term("H_E") + H.term("H_M")
    E = Channel.unitary(expm_hermitian(F, -t) @ exact_evolution(H, t))
    nrm = spectral_norm(H.term("H_h"))
    out, errs, rs = [], [], [1, 2, 4, 8, 16]
    for r in rs:
        lo, _ = diamond_bracket(qdrift_channel_segments(HI, 0, t, r, uniform=True) - E)
        errs.append(lo)
        out.append(le(f"qDRIFT r={r}", "interaction-frame qDRIFT bound 4t^2||H_I||^2/r",
                      lo, 4 * t * t * nrm ** 2 / r))
    out.append(le("qDRIFT error slope", "error decays at least as 1/r", slope(rs, errs), -0.9))
    Htd = TimeDependentHam(mc_hamiltonian, 0.0, 1.0, 4)
    conv = sampled_convergence(Htd, 0.0, 1.0, 2, seed)
    Ms = sorted(conv)
    s = slope(Ms, [conv[m] for m in Ms])
    out.append(le("sampled channel convergence slope", "Monte Carlo error ~ M^-1/2",
                  abs(s + 0.5), 0.1))
    return out


def mc_hamiltonian(tau: float) -> np.ndarray:
    """Two-qubit drive with a time-varying norm, used for sampling checks."""
    return ((1 + tau) * np.kron(Z, I2) + np.cos(tau) * np.kron(X, X)
            + 0.5 * np.kron(I2, Y))


@suite("trotter_bounds")
def _trotter(tol, seed):
    from ..models import SumHamiltonian
    H = SumHamiltonian.from_terms([("X", X), ("Z", Z)])
    U, _ = trotter_product(H, 1.0, 1, 1)
    out = [le("first-order single step", "first-order commutator bound",
              spectral_norm(U - exact_evolution(H, 1.0)), 1.0)]
    rs = [1, 2, 4, 8]
    errs = [spectral_norm(trotter_product(H, 1.0, r, 2)[0] - exact_evolution(H, 1.0)) for r in rs]
    s = slope(rs, errs)
    out.append(le("second-order slope", "second-order error ~ r^-2", abs(s + 2), 0.1))
    rng = np.random.default_rng(seed)
    for k in range(5):
        Hr = random_sum_hamiltonian(2, 3, rng)
        res = trotter_qdrift_ip(Hr, "H0", 0.5, 0.05)
        out.append(le(f"hybrid Trotter+qDRIFT random #{k}", "interaction-frame Trotter+qDRIFT bound",
                      res.error_lower, res.predicted_bound))
    return out


@suite("qubitization")
def _qubitization(tol, seed):
    rng = np.random.default_rng(seed)
    out = []
    worst_block, worst_spec = 0.0, 0.0
    for k in range(20):
        nq = 1 + k % 2
        lcu = random_pauli_lcu(nq, int(rng.integers(2, 6)), rng)
        S = select_matrix(lcu)
        blk = signal_block(S, prepared_state(lcu), lcu.dim)
        worst_block = max(worst_block, spectral_norm(blk - lcu.matrix() / lcu.lam))
        w = walk_operator(lcu)
        cos = lcu.lam * np.cos(w.eigenphases())
        ev = np.linalg.eigvalsh(lcu.matrix())
        worst_spec = max(worst_spec, max(np.min(np.abs(cos - e)) for e in ev))
    out.append(le("signal block = H/lambda", "qubitization block identity", worst_block, 1e-12))
    out.append(le("walk spectrum", "walk eigenphases arccos(E/lambda)", worst_spec, 1e-9))
    return out


@suite("hybrids")
def _hybrids(tol, seed):
    rng = np.random.default_rng(seed)
    out = []
    t, eps = 0.5, 0.05
    for k in range(3):
        H = random_sum_hamiltonian(2, 3, rng)
        r1 = trotter_qdrift_ip(H, "H0", t, eps)
        r2 = qdrift_qubitization_ip(H, "H0", t, eps)
        r3 = trotter_qdrift_qubitization_ip(H, "H0", t, eps)
        out.append(le(f"random #{k} Trotter+qDRIFT", "Trotter+qDRIFT interaction-frame bound",
                      r1.error_lower, r1.predicted_bound))
        out.append(le(f"random #{k} qDRIFT+qubitization", "qDRIFT+qubitization error <= eps",
                      r2.error_lower, eps))
        out.append(le(f"random #{k} Trotter+qDRIFT+qubitization", "three-way hybrid error <= eps",
                      r3.error_lower, eps))
    p, H = _schwinger_ip()
    frame = ("H_E", "H_M")
    out.append(le("Schwinger Trotter+qDRIFT", "Trotter+qDRIFT interaction-frame bound",
                  trotter_qdrift_ip(H, frame, t, eps).error_lower,
                  trotter_qdrift_ip(H, frame, t, eps).predicted_bound))
    out.append(le("Schwinger qDRIFT+qubitization", "qDRIFT+qubitization error <= eps",
                  qdrift_qubitization_ip(H, frame, t, eps).error_lower, eps))
    Hs = split_hopping(H, p)
    out.append(le("Schwinger Trotter+qDRIFT+qubitization", "three-way hybrid error <= eps",
                  trotter_qdrift_qubitization_ip(Hs, frame, t, eps).error_lower, eps))
    return out


@suite("schwinger")
def _schwinger(tol, seed):
    out = []
    lcu = lcu_of_hopping(SchwingerParams(4, 1, a=0.5))
    out.append(eq("lambda' = (N-1)/a", "hopping LCU normalization", lcu.lam, 3 / 0.5))
    out.append(eq("L = 8(N-1)", "hopping LCU term count", lcu.L, 24))
    out.append(eq("r for N=5, a=1, t=1, eps=0.01", "closed-form Schwinger segment count",
                  schwinger_segment_count(5, 1.0, 1.0, 0.01), 204))
    p, H = _schwinger_ip(4)
    Hs = split_hopping(H, p)
    dev = spectral_norm(Hs.term("H_h_odd") + Hs.term("H_h_even") - H.term("H_h"))
    out.append(le("even + odd = H_h", "hopping parity split", dev, 0.0))
    pieces = lcu.unitaries
    A, B = pieces[0], pieces[1]
    out.append(le("[U XX, U YY] = 0", "same-link hopping pieces commute",
                  spectral_norm(A @ B - B @ A), 1e-12))
    ratios = []
    for N in (3, 4, 5):
        q = SchwingerParams(N, 1)
        Hq = split_hopping(build_schwinger(q, allow_odd=True), q, allow_odd=True)
        c = commutator_constant(Hq, ("H_E", "H_M"))
        ratios.append(c / schwinger_claimed_c_I(N, 1.0))
        out.append(Check(f"c_I N={N} (ratio to closed form {ratios[-1]:.4g})",
                         "hopping commutator constant", c, float("nan"), True))
    out.append(le("c_I ratio spread max/min", "closed-form c_I scaling in N",
                  max(ratios) / min(ratios), 2.0))
    return out


NEUTRINO_POINT = dict(N=4, omegas=(1.0, 2.0, 3.0, 4.0), theta=0.1, mu=1.0, t=1.0, r=400)


@suite("neutrino")
def _neutrino(tol, seed):
    cfg = NEUTRINO_POINT
    out = []
    p = NeutrinoParams(cfg["N"], cfg["omegas"], cfg["theta"], 3.0, cfg["mu"])
    Hip = neutrino_ip_ham(p)
    H = build_neutrino(p)
    Hm = H.term("H_matter")
    worst = 0.0
    for tau in (0.0, 0.37, 1.3):
        ref = expm_hermitian(Hm, -tau) @ (H.term("H_vac") + H.term("H_nu_nu")) @ expm_hermitian(Hm, tau)
        worst = max(worst, spectral_norm(Hip(tau) - ref))
    out.append(le("rotating-frame closed form", "matter-frame closed form", worst, 1e-10))
    labs, ips = [], []
    for lam in (1.0, 10.0, 100.0):
        lab, ip = neutrino_lab_vs_ip_error(p.replace(lambda_e=lam), cfg["t"], cfg["r"])
        labs.append(lab)
        ips.append(ip)
    spread = (max(ips) - min(ips)) / min(ips)
    out.append(le("hybrid error spread over lambda", "matter-frame error independent of lambda",
                  spread, 0.05))
    out.append(Check("lab error increases with lambda", "lab-frame Trotter error grows with lambda",
                     float(labs[-1]), float("nan"), bool(labs[0] < labs[1] < labs[2])))
    return out


@suite("constraints")
def _constraints(tol, seed):
    sys = PenaltySystem(X, np.diag([0.0, 1.0]), 0.0)
    exp = ConstraintExperiment(sys, 1.0, np.array([1.0, 0.0]), [10.0, 100.0, 1000.0])
    s = exp.slope()
    out = [le("penalty error slope", "penalty error O(||H_f||^2 t / lambda)", abs(s + 1), 0.1),
           eq("min_lambda(1, 1, 0.01)", "lambda >= ||H_f||^2 t / eps", min_lambda(1, 1, 0.01), 100.0)]
    p = SchwingerParams(2, 1)
    ledgers = [gauss_filtered_hybrid(p, lp, 0.5, 0.05).ledger.as_dict() for lp in (10.0, 100.0)]
    out.append(Check("ledger independent of penalty", "cost independent of penalty strength",
                     0.0, 0.0, ledgers[0] == ledgers[1]))
    res = gauss_filtered_hybrid(p, 100.0, 0.5, 0.05)
    out.append(le("Gauss-sector leakage", "leakage <= eps", res.info["leakage"], 0.05))
    return out


@suite("resources")
def _resources(tol, seed):
    _, stages = toffoli_select(5, 8, breakdown=True)
    rep = gate_complexity_report("neutrino_hybrid", {"N": 4, "mu": 1, "t": 1, "eps": 0.01})
    return [eq("toffoli_prepare(9)", "PREPARE Toffoli count", toffoli_prepare(9), 640),
            eq("select_paulis(5)", "controlled Pauli Toffoli count", stages["select_paulis"], 19),
            eq("ctrl_Ur(5, 8)", "controlled link raising Toffoli count", stages["ctrl_Ur"], 208),
            eq("neutrino hybrid exponentials", "N^3 mu^2 t^2 / eps", rep.values["value"], 6400.0),
            eq("qDRIFT row", "t^2 (sum ||H_k||)^2 / eps",
               method_queries("qdrift", {"norm_sum": 2, "t": 1, "eps": 0.04}), 100.0)]


def verify(name: str, tol: float = 1e-9, seed: int = 1234) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SUITES[name](tol, seed)


def report_lines(name: str, checks: list[Check]) -> list[str]:
    lines = [f"suite {name}"]
    for c in checks:
        tag = "PASS" if c.passed else "FAIL"
        bound = "" if math.isnan(c.bound) else f" bound={c.bound:.6g} margin={c.margin:.3g}"
        lines.append(f"  [{tag}] {c.name} <{c.anchor}> measured={c.measured:.6g}{bound}")
    return lines


def checks_as_dicts(checks: list[Check]) -> list[dict]:
    out = []
    for c in checks:
        d = asdict(c)
        for k in ("measured", "bound"):
            if isinstance(d[k], float) and math.isnan(d[k]):
                d[k] = None
        out.append(d)
    return out
