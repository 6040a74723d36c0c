"""Run experiments: one ResultRow per sweep point, in sweep order."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..channels import Channel, diamond_bracket
from ..evolvers import exact_evolution, first_order_bound, trotter_product
from ..hybrid import (SegmentCapError, qdrift_qubitization_ip, trotter_qdrift_ip,
                      trotter_qdrift_qubitization_ip)
from ..models import DimensionCapError, SumHamiltonian
from ..resources import walk_toffoli_report
from .config import ExperimentConfig, build_model

CSV_FIELDS = ("model,protocol,N,cutoff,a,g,m,lambda,mu,theta,t,epsilon,r,error_lower,"
              "error_upper,bound,calls_prepare,calls_select,calls_Wl,calls_Wk,toffoli,"
              "wall_ms,seed").split(",")


@dataclass
class ResultRow:
    values: dict = field(default_factory=dict)
    status: str = "ok"

    def get(self, key):
        return self.values.get(key)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("IPSIM_THREADS", "1")))
    except ValueError:
        return 1


def _merge_non_frame(H: SumHamiltonian, frame) -> SumHamiltonian:
    """Collapse every non-frame term into one term "H_rest"."""
    F, rest = H.split_frame(frame)
    frame_labels = [lab for lab in H.labels if lab not in rest]
    labels = frame_labels + ["H_rest"]
    terms = [H.term(lab) for lab in frame_labels] + [sum(H.term(lab) for lab in rest)]
    ff = [H.fast_forward[H.index(lab)] for lab in frame_labels] + [False]
    return SumHamiltonian(labels, terms, ff)


def _protocol(H: SumHamiltonian, frame, cfg: ExperimentConfig) -> dict:
    proto = cfg.protocol
    kind = proto["kind"]
    t, eps = cfg.t, cfg.eps
    r_cap = int(cfg.caps["r"])
    out = {}
    if kind == "exact":
        out.update(r=0, error_lower=0.0, error_upper=0.0, bound=0.0)
        return out
    if kind == "trotter":
        r = int(proto.get("r", 1))
        order = int(proto.get("order", 1))
        U, ledger = trotter_product(H, t, r, order)
        lo, hi = diamond_bracket(Channel.unitary(U) - Channel.unitary(exact_evolution(H, t)))
        bound = 2 * first_order_bound(H, t, r) if order == 1 else None
        out.update(r=r, error_lower=lo, error_upper=hi, bound=bound,
                   calls_Wk=ledger.total_Wk)
        return out
    mode = proto.get("mode", "exact")
    r = proto.get("r")
    r = None if r is None else int(r)
    if kind in ("qdrift", "hybrid_tq"):
        target = _merge_non_frame(H, frame) if kind == "qdrift" else H
        res = trotter_qdrift_ip(target, frame, t, eps, mode=mode, seed=cfg.seed,
                                M=cfg.trajectories, r=r, r_cap=r_cap)
    elif kind == "hybrid_qq":
        res = qdrift_qubitization_ip(H, frame, t, eps, r=r, r_cap=r_cap)
    else:
        res = trotter_qdrift_qubitization_ip(H, frame, t, eps, r=r, r_cap=r_cap)
    lo, hi = res.measured_error_bracket
    led = res.ledger
    out.update(r=res.r_used, error_lower=lo, error_upper=hi, bound=res.predicted_bound,
               calls_prepare=led.calls_prepare, calls_select=led.calls_select,
               calls_Wl=led.calls_Wl_frame, calls_Wk=led.total_Wk)
    return out


def run_point(cfg: ExperimentConfig) -> ResultRow:
    start = time.perf_counter()
    vals = {"model": cfg.model["kind"], "protocol": cfg.protocol["kind"], "t": cfg.t,
            "epsilon": cfg.eps, "seed": cfg.seed}
    status = "ok"
    try:
        H, frame, echo = build_model(cfg.model, int(cfg.caps["dim"]))
        if cfg.frame is not None:
            frame = tuple(cfg.frame)
        vals.update(echo)
        vals.update(_protocol(H, frame, cfg))
        if (cfg.model["kind"] == "schwinger" and vals.get("calls_select")
                and vals.get("cutoff", 0) >= 2):
            per_walk = walk_toffoli_report(vals["N"], vals["cutoff"]).toffoli_total
            vals["toffoli"] = per_walk * vals["calls_select"]
    except (SegmentCapError, DimensionCapError) as exc:
        status = f"cap: {exc}"
    if cfg.record_timing:
        vals["wall_ms"] = (time.perf_counter() - start) * 1e3
    return ResultRow(vals, status)


def run(config: ExperimentConfig, threads: Optional[int] = None) -> list[ResultRow]:
    """Evaluate every sweep point; rows come back in sweep order."""
    points = config.points()
    n = threads or thread_count()
    if n == 1 or len(points) == 1:
        return [run_point(p) for p in points]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(run_point, points))


def sweep_values(config: ExperimentConfig) -> Optional[list]:
    return None if config.sweep is None else list(config.sweep["values"])


def as_float(x) -> float:
    return float(np.real(x))
