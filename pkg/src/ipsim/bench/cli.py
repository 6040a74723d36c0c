"""Command-line entry point: ``ipsim verify | run | resources``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .emit import emit
from .runner import run
from .verify import SUITES, checks_as_dicts, report_lines, verify


def _kv(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"expected K=V, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ipsim", description="Interaction-picture simulation bench")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])
    v.add_argument("--seed", type=int, default=1234)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--out", type=Path)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", required=True, type=Path)
    r.add_argument("--format", choices=["csv", "json", "svg"], default="csv")

    s = sub.add_parser("resources", help="evaluate closed-form cost expressions")
    s.add_argument("--model", required=True)
    s.add_argument("--params", nargs="*", default=[])
    s.add_argument("--format", choices=["json", "text"], default="text")
    return ap


def _cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    report = {}
    for name in names:
        checks = verify(name, args.tol, args.seed)
        for line in report_lines(name, checks):
            print(line)
        ok &= all(c.passed for c in checks)
        report[name] = checks_as_dicts(checks)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "verify_report.json").write_text(json.dumps(report, indent=2))
    print("ALL PASS" if ok else "FAILURES PRESENT")
    return 0 if ok else 1


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    rows = run(cfg)
    x_key = "r"
    if cfg.sweep is not None:
        leaf = cfg.sweep["param"].split(".")[-1]
        x_key = {"eps": "epsilon", "cutoff": "cutoff"}.get(leaf, leaf)
    emit(rows, args.format, args.out, x_key=x_key)
    bad = [row for row in rows if row.status != "ok"]
    for row in bad:
        print(f"row status: {row.status}", file=sys.stderr)
    return 1 if bad else 0


def _cmd_resources(args) -> int:
    from .. import resources
    params = _kv(args.params)
    if args.model == "walk":
        rep = resources.walk_toffoli_report(int(params["N"]), int(params["Lambda"]),
                                            float(params.get("c_Q", 1)), float(params.get("c_D", 1)))
    elif args.model in resources.GATE_MODELS:
        rep = resources.gate_complexity_report(args.model, params)
    else:
        method = params.pop("method", args.model)
        print(json.dumps({"method": method, "value": resources.method_queries(method, params)}))
        return 0
    if args.format == "json":
        print(rep.to_json())
    else:
        for k, v in rep.values.items():
            print(f"{k}: {v:.6g}")
        for k, v in rep.toffoli_by_stage.items():
            print(f"toffoli[{k}]: {v}")
        for k, v in rep.sensitivity.items():
            print(f"2x {k}: {v:.6g}")
    return 0


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        if args.cmd == "verify":
            return _cmd_verify(args)
        if args.cmd == "run":
            return _cmd_run(args)
        return _cmd_resources(args)
    except (ConfigError, KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
