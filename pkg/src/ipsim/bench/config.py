"""Experiment configuration (JSON, schema 1) and model/protocol construction."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..models import (NeutrinoParams, SchwingerParams, SumHamiltonian, build_neutrino,
                      build_penalty, build_schwinger, pauli_sum, random_sum_hamiltonian,
                      split_hopping)

MODELS = ("schwinger", "neutrino", "penalty", "random")
PROTOCOLS = ("exact", "trotter", "qdrift", "hybrid_tq", "hybrid_qq", "hybrid_tqq")
DEFAULT_CAPS = {"dim": 16384, "r": 10 ** 6, "trajectories": 10 ** 5}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: dict
    protocol: dict
    t: float = 1.0
    eps: Optional[float] = None
    seed: int = 0
    trajectories: int = 100
    sweep: Optional[dict] = None
    frame: Optional[list] = None
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))
    record_timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        if d.pop("schema", None) != 1:
            raise ConfigError('config must declare "schema": 1')
        for key in ("model", "protocol"):
            if not isinstance(d.get(key), dict) or "kind" not in d[key]:
                raise ConfigError(f'"{key}" must be an object with a "kind" field')
        if d["model"]["kind"] not in MODELS:
            raise ConfigError(f"unknown model kind {d['model']['kind']!r}")
        if d["protocol"]["kind"] not in PROTOCOLS:
            raise ConfigError(f"unknown protocol kind {d['protocol']['kind']!r}")
        caps = dict(DEFAULT_CAPS)
        caps.update(d.pop("caps", {}) or {})
        sweep = d.get("sweep")
        if sweep is not None:
            if not sweep.get("values") or "param" not in sweep:
                raise ConfigError("sweep needs a parameter path and a nonempty value list")
        known = {"model", "protocol", "t", "eps", "seed", "trajectories", "sweep", "frame",
                 "record_timing"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(caps=caps, **d)
        if cfg.trajectories > caps["trajectories"]:
            raise ConfigError("trajectories exceed cap")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = {"schema": 1, "model": self.model, "protocol": self.protocol, "t": self.t,
             "eps": self.eps, "seed": self.seed, "trajectories": self.trajectories,
             "caps": self.caps, "record_timing": self.record_timing}
        if self.sweep is not None:
            d["sweep"] = self.sweep
        if self.frame is not None:
            d["frame"] = self.frame
        return d

    def points(self) -> list["ExperimentConfig"]:
        """One config per sweep value (or just this config)."""
        if self.sweep is None:
            return [self]
        out = []
        for v in self.sweep["values"]:
            d = self.to_dict()
            d.pop("sweep")
            set_path(d, self.sweep["param"], v)
            out.append(ExperimentConfig.from_dict(d))
        return out


def set_path(d: dict, path: str, value):
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def build_model(spec: dict, cap: int) -> tuple[SumHamiltonian, tuple, dict]:
    """Return (Hamiltonian, default frame labels, row echo fields)."""
    kind = spec["kind"]
    if kind == "schwinger":
        p = SchwingerParams(int(spec.get("N", 2)), int(spec.get("cutoff", 1)),
                            float(spec.get("a", 1.0)), float(spec.get("g", 1.0)),
                            float(spec.get("m", 0.5)))
        H = build_schwinger(p, cap=cap)
        if spec.get("split_hopping"):
            H = split_hopping(H, p)
        echo = {"N": p.N, "cutoff": p.Lambda, "a": p.a, "g": p.g, "m": p.m}
        return H, ("H_E", "H_M"), echo
    if kind == "neutrino":
        N = int(spec.get("N", 2))
        p = NeutrinoParams(N, spec.get("omegas", [1.0] * N), float(spec.get("theta", 0.1)),
                           float(spec.get("lambda", 1.0)), float(spec.get("mu", 1.0)),
                           spec.get("J"))
        echo = {"N": N, "lambda": p.lambda_e, "mu": p.mu, "theta": p.theta}
        return build_neutrino(p), ("H_matter",), echo
    if kind == "penalty":
        H_f = pauli_sum(spec.get("H_f", {"X": 1.0}))
        P = np.diag(np.asarray(spec.get("P_diag", [0, 1]), dtype=complex))
        lam = float(spec.get("lambda", 10.0))
        echo = {"lambda": lam}
        return build_penalty(H_f, P, lam), ("penalty",), echo
    if kind == "random":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        nq = int(spec.get("n_qubits", 2))
        H = random_sum_hamiltonian(nq, int(spec.get("n_terms", 3)), rng)
        return H, ("H0",), {"N": nq}
    raise ConfigError(f"unknown model kind {kind!r}")
