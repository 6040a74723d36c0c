import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ipsim.bench import cli
from ipsim.bench.config import ConfigError, ExperimentConfig
from ipsim.bench.emit import emit, fmt, to_csv, to_json, to_svg
from ipsim.bench.runner import CSV_FIELDS, ResultRow, run
from ipsim.bench.verify import SUITES, Check, verify

HEADER = ("model,protocol,N,cutoff,a,g,m,lambda,mu,theta,t,epsilon,r,error_lower,error_upper,"
          "bound,calls_prepare,calls_select,calls_Wl,calls_Wk,toffoli,wall_ms,seed")


def cfg(**kw):
    d = {"schema": 1, "model": {"kind": "schwinger", "N": 2, "cutoff": 1},
         "protocol": {"kind": "qdrift"}, "t": 0.5, "eps": 0.05, "seed": 3}
    d.update(kw)
    return ExperimentConfig.from_dict(d)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"model": {"kind": "schwinger"}, "protocol": {"kind": "exact"}})
    with pytest.raises(ConfigError):
        cfg(model={"kind": "ising"})
    with pytest.raises(ConfigError):
        cfg(protocol={"kind": "magic"})
    with pytest.raises(ConfigError):
        cfg(sweep={"param": "protocol.r", "values": []})
    with pytest.raises(ConfigError):
        cfg(bogus=1)
    with pytest.raises(ConfigError):
        cfg(trajectories=10 ** 6)


def test_config_roundtrip_and_points():
    c = cfg(sweep={"param": "protocol.r", "values": [1, 2, 4]})
    again = ExperimentConfig.from_dict(c.to_dict())
    assert again.to_dict() == c.to_dict()
    assert [p.protocol["r"] for p in c.points()] == [1, 2, 4]


@pytest.mark.parametrize("model", [{"kind": "schwinger", "N": 2, "cutoff": 1},
                                   {"kind": "neutrino", "N": 2, "omegas": [1, 2]},
                                   {"kind": "penalty", "H_f": {"X": 1.0}, "lambda": 20},
                                   {"kind": "random", "n_qubits": 2, "seed": 5}])
def test_exact_protocol_zero_error(model):
    rows = run(cfg(model=model, protocol={"kind": "exact"}))
    assert len(rows) == 1 and rows[0].status == "ok"
    v = rows[0].values
    assert v["error_lower"] == v["error_upper"] == 0.0


def test_qdrift_sweep_bound_halves():
    rows = run(cfg(sweep={"param": "protocol.r", "values": [1, 2, 4]}))
    assert [r.values["r"] for r in rows] == [1, 2, 4]
    b = [r.values["bound"] for r in rows]
    assert b[1] == pytest.approx(b[0] / 2) and b[2] == pytest.approx(b[1] / 2)
    for r in rows:
        assert 0 <= r.values["error_lower"] <= r.values["error_upper"]


@pytest.mark.parametrize("proto", [{"kind": "trotter", "r": 4, "order": 1},
                                   {"kind": "trotter", "r": 2, "order": 2},
                                   {"kind": "hybrid_tq"}, {"kind": "hybrid_qq"},
                                   {"kind": "hybrid_tqq"}])
def test_protocols_run(proto):
    model = {"kind": "schwinger", "N": 2, "cutoff": 1, "split_hopping": True}
    row = run(cfg(model=model, protocol=proto))[0]
    assert row.status == "ok"
    v = row.values
    assert v["error_lower"] <= v["error_upper"] + 1e-15
    if v.get("bound") is not None:
        assert v["bound"] >= 0


def test_toffoli_column_for_larger_cutoff():
    c = cfg(model={"kind": "schwinger", "N": 2, "cutoff": 2}, protocol={"kind": "hybrid_qq"},
            t=0.2, eps=0.1)
    v = run(c)[0].values
    assert v["toffoli"] > 0 and v["toffoli"] % v["calls_select"] == 0


def test_cap_sets_row_status():
    rows = run(cfg(caps={"dim": 4}))
    assert rows[0].status.startswith("cap")
    rows = run(cfg(eps=1e-7, caps={"r": 10}))
    assert rows[0].status.startswith("cap")


def test_csv_header_and_single_row():
    text = to_csv(run(cfg(protocol={"kind": "exact"})))
    lines = text.splitlines()
    assert lines[0] == HEADER and len(lines) == 2
    assert ",".join(CSV_FIELDS) == HEADER


def test_csv_roundtrip_twelve_digits():
    vals = {"model": "random", "protocol": "exact", "t": 1 / 3, "epsilon": np.pi * 1e-7,
            "error_lower": 2 ** -40, "r": 7, "seed": 12}
    text = to_csv([ResultRow(vals)])
    back = next(csv.DictReader(io.StringIO(text)))
    for k in ("t", "epsilon", "error_lower"):
        assert float(back[k]) == pytest.approx(vals[k], rel=1e-11)
    assert back["r"] == "7" and back["mu"] == ""
    assert fmt(float("nan")) == "" and fmt(None) == "" and fmt(True) == "true"


def test_json_mirrors_fields():
    rows = run(cfg(protocol={"kind": "exact"}))
    d = json.loads(to_json(rows))[0]
    assert set(d) == set(CSV_FIELDS) | {"status"}


def test_svg_two_protocols(tmp_path):
    rows = (run(cfg(sweep={"param": "protocol.r", "values": [1, 2, 4]}))
            + run(cfg(protocol={"kind": "hybrid_tq"}, sweep={"param": "protocol.r", "values": [1, 2, 4]})))
    svg = to_svg(rows, x_label="r")
    assert svg.count("<polyline") == 2
    assert 'width="800"' in svg and 'height="600"' in svg
    path = emit(rows, "svg", tmp_path / "p.svg")
    assert path.read_text().startswith("<svg")
    with pytest.raises(ValueError):
        to_svg([])


def test_emit_errors(tmp_path):
    rows = [ResultRow({"model": "x"})]
    with pytest.raises(ValueError):
        emit(rows, "xml", tmp_path / "a")
    with pytest.raises(OSError):
        emit(rows, "csv", tmp_path / "missing" / "dir" / "a.csv")


def test_run_deterministic_across_threads():
    c = cfg(protocol={"kind": "qdrift", "mode": "sampled"}, trajectories=20,
            sweep={"param": "protocol.r", "values": [1, 2, 3, 4]})
    a = to_csv(run(c, threads=1))
    b = to_csv(run(c, threads=4))
    assert a == b


def test_verify_suites_listed_and_unknown():
    assert set(SUITES) == {"norms", "qdrift_bounds", "trotter_bounds", "qubitization", "hybrids",
                           "schwinger", "neutrino", "constraints", "resources"}
    with pytest.raises(KeyError):
        verify("bogus")


@pytest.mark.parametrize("name", ["norms", "qubitization", "resources", "constraints"])
def test_verify_fast_suites_pass(name):
    checks = verify(name)
    assert checks and all(c.passed for c in checks)
    assert all(c.anchor for c in checks)


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["verify", "--suite", "norms", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert "norms" in report
    monkeypatch.setitem(SUITES, "norms", lambda tol, seed: [Check("x", "y", 2.0, 1.0, False)])
    assert cli.main(["verify", "--suite", "norms"]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify"])
    assert exc.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 2}))
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    assert cli.main(["resources", "--model", "neutrino_hybrid", "--params", "N=4"]) == 2
    capsys.readouterr()


def test_cli_resources_json(capsys):
    assert cli.main(["resources", "--model", "neutrino_hybrid", "--params", "N=4", "mu=1", "t=1",
                     "eps=0.01", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["values"]["value"] == pytest.approx(6400)
    assert cli.main(["resources", "--model", "walk", "--params", "N=5", "Lambda=8",
                     "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["toffoli_by_stage"]["ctrl_Ur"] == 208
    assert cli.main(["resources", "--model", "qdrift", "--params", "norm_sum=2", "t=1",
                     "eps=0.04"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(100)


def test_console_script(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps(cfg(protocol={"kind": "exact"}).to_dict()))
    out = tmp_path / "o.csv"
    proc = subprocess.run([sys.executable, "-m", "ipsim.bench.cli", "run", "--config", str(conf),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[0] == HEADER
