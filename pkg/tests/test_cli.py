from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from acpf.cli import REPORT_HEADER, main
from acpf.models import dumps_model, load_model


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def suite_dir(tmp_path, capsys):
    d = tmp_path / "qv"
    assert run(capsys, "gen-suite", "--name", "quadratic", "--n", 30, "--seed", 0, "--out-dir", d)[0] == 0
    return d


def test_gen_suite_layout(suite_dir):
    assert (suite_dir / "manifest.csv").exists()
    assert (suite_dir / "scenario.json").exists()
    assert len(list((suite_dir / "payloads").glob("*.json"))) == 30
    rows = list(csv.reader(open(suite_dir / "manifest.csv")))
    assert rows[0] == ["id", "path", "f1"] and len(rows) == 31


def test_gen_suite_rejects_unknown(tmp_path, capsys):
    assert run(capsys, "gen-suite", "--name", "sat", "--n", 3, "--out-dir", tmp_path)[0] == 2


def test_tune_partition_one(suite_dir, tmp_path, capsys):
    out = tmp_path / "p1"
    code, stdout, _ = run(capsys, "tune", "--scenario", suite_dir / "scenario.json", "--model", "partition:1",
                          "--budget-evals", 600, "--seed", 7, "--out", out)
    assert code == 0
    assert "evaluations=" in stdout
    model = load_model(out / "model.json")
    assert model.C == 1
    assert (out / "runlog.ndjson").read_text().count("\n") > 0
    c0 = model.clusters[0].configuration
    code, stdout, _ = run(capsys, "recommend", "--model", out / "model.json", "--instance", "0.93")
    assert code == 0
    rec = json.loads(stdout)
    assert rec["configuration"] == dict(c0)
    assert set(rec) == {"configuration", "source", "detail", "elapsed_seconds"}


def test_tune_deterministic(suite_dir, tmp_path, capsys):
    for name in ("a", "b"):
        assert run(capsys, "tune", "--scenario", suite_dir / "scenario.json", "--model", "mapping",
                   "--budget-evals", 120, "--seed", 3, "--out", tmp_path / name)[0] == 0
    for f in ("model.json", "runlog.ndjson"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_tune_invalid_inputs(suite_dir, tmp_path, capsys):
    sc = suite_dir / "scenario.json"
    assert run(capsys, "tune", "--scenario", sc, "--model", "mapping", "--budget-evals", 0,
               "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "tune", "--scenario", sc, "--model", "forest", "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "tune", "--scenario", tmp_path / "missing.json", "--model", "mapping",
               "--out", tmp_path / "x")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["tune", "--scenario", str(sc)])
    assert exc.value.code == 2


def test_tune_spawn_failure_exit_3(suite_dir, tmp_path, capsys):
    raw = json.loads((suite_dir / "scenario.json").read_text())
    raw["target"] = {"kind": "external", "command": "/no/such/solver {instance}", "cutoff_seconds": 1}
    p = suite_dir / "broken.json"
    p.write_text(json.dumps(raw))
    code, _, err = run(capsys, "tune", "--scenario", p, "--model", "mapping", "--budget-evals", 8,
                       "--out", tmp_path / "x")
    assert code == 3 and "target" in err


def test_tune_external_wrapper(suite_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "tune", "--scenario", suite_dir / "scenario_external.json", "--model", "mapping",
                     "--budget-evals", 8, "--parallelism", 1, "--out", tmp_path / "ext")
    assert code == 0
    recs = [json.loads(l) for l in (tmp_path / "ext" / "archive.ndjson").read_text().splitlines()]
    assert len(recs) == 8 and all(r["status"] == "ok" for r in recs)


def test_recommend_mapping_label_and_surrogate_pool(suite_dir, tmp_path, capsys):
    sc = suite_dir / "scenario.json"
    run(capsys, "tune", "--scenario", sc, "--model", "mapping", "--budget-evals", 90, "--out", tmp_path / "m")
    model = load_model(tmp_path / "m" / "model.json")
    code, stdout, _ = run(capsys, "recommend", "--model", tmp_path / "m" / "model.json",
                          "--instance", suite_dir / "manifest.csv", "--instance-id", "train-0005")
    assert code == 0
    assert json.loads(stdout)["configuration"] == dict(model.labels[model.ids.index("train-0005")])

    run(capsys, "tune", "--scenario", sc, "--model", "surrogate", "--budget-evals", 90, "--out", tmp_path / "s")
    smodel = tmp_path / "s" / "model.json"
    assert run(capsys, "recommend", "--model", smodel, "--instance", "0.4")[0] == 2
    assert run(capsys, "recommend", "--model", smodel, "--instance", "0.4", "--pool", "grid:11")[0] == 0
    pool = tmp_path / "pool.json"
    pool.write_text(json.dumps([{"x": 0.1, "m": "a"}]))
    code, stdout, _ = run(capsys, "recommend", "--model", smodel, "--instance", "0.4", "--pool", pool)
    assert json.loads(stdout)["configuration"] == {"x": 0.1, "m": "a"}
    assert run(capsys, "recommend", "--model", smodel, "--instance", "zero")[0] == 2


def test_model_file_roundtrip(suite_dir, tmp_path, capsys):
    run(capsys, "tune", "--scenario", suite_dir / "scenario.json", "--model", "partition:3",
        "--budget-evals", 150, "--out", tmp_path / "p")
    text = (tmp_path / "p" / "model.json").read_text()
    assert dumps_model(load_model(tmp_path / "p" / "model.json")) == text


def test_run_online(tmp_path, capsys):
    d = tmp_path / "cliff"
    run(capsys, "gen-suite", "--name", "cliff", "--n", 10, "--out-dir", d)
    raw = json.loads((d / "scenario.json").read_text())
    raw["pool"] = {"configurations": [{"x": 0.5, "m": "a"}, {"x": 0.5, "m": "b"}]}
    (d / "scenario.json").write_text(json.dumps(raw))
    stream = d / "stream.csv"
    stream.write_text("id,path,f1\n" + "".join(f"s{j},,{0.1 + j / 100}\n" for j in range(30)))
    code, _, _ = run(capsys, "run-online", "--scenario", d / "scenario.json", "--stream", stream,
                     "--variant", "reactive", "--seed", 1, "--out", tmp_path / "o")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "o" / "trace.csv")))
    assert len(rows) == 30
    assert {"arrival", "instance_id", "config_digest", "performance"} <= set(rows[0])
    assert load_model(tmp_path / "o" / "model.json").clusters[0].configuration["m"] == "a"

    empty = d / "empty.csv"
    empty.write_text("id,path,f1\n")
    assert run(capsys, "run-online", "--scenario", d / "scenario.json", "--stream", empty,
               "--out", tmp_path / "o2")[0] == 2


def test_bench(tmp_path, capsys):
    report = tmp_path / "r.csv"
    code, _, _ = run(capsys, "bench", "--suite", "quadratic", "--strategies", "mapping,partition:1",
                     "--budget-evals", 120, "--seeds", "0,1,2", "--report", report)
    assert code == 0
    rows = list(csv.reader(open(report)))
    assert rows[0] == REPORT_HEADER
    assert len(rows) == 1 + 2 * 3
    assert all(float(r[4]) >= 0 for r in rows[1:])


@pytest.mark.parametrize("argv", [
    ["--suite", "quadratic", "--strategies", "bogus"],
    ["--suite", "quadratic", "--strategies", "online:greedy"],
    ["--suite", "external", "--strategies", "mapping"],
    ["--suite", "quadratic", "--strategies", "mapping", "--budget-evals", "0"],
])
def test_bench_rejects(tmp_path, capsys, argv):
    assert run(capsys, "bench", *argv, "--report", tmp_path / "r.csv")[0] == 2
    assert not (tmp_path / "r.csv").exists()


def test_console_entry_points(tmp_path):
    for cmd in (["acpf"], [sys.executable, "-m", "acpf"]):
        proc = subprocess.run(cmd + ["gen-suite", "--name", "cliff", "--n", "2", "--out-dir",
                                     str(tmp_path / "g")], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    proc = subprocess.run(["acpf", "recommend", "--model", str(tmp_path / "nope.json"), "--instance", "0.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
