from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from acpf.config_space import Configuration, sample_uniform
from acpf.evaluation import (EvalArchive, EvalRecord, TargetSpawnError, TargetSpec, build_command,
                             evaluate, evaluate_batch, parse_result, synthetic_target)
from acpf.fixtures import s2_space
from acpf.instances import Instance
from conftest import scond_space

TARGETS = Path(__file__).parent / "targets"
QV = synthetic_target("quadratic_valley")
CLIFF = synthetic_target("cliff")


def inst(f: float, iid: str = "i") -> Instance:
    return Instance(iid, (f,))


def external(script: str, cutoff: float = 5.0, extra: str = "") -> TargetSpec:
    return TargetSpec(kind="external", command=f"{sys.executable} {TARGETS / script} {extra}",
                      cutoff_seconds=cutoff, penalized_value=-7.0)


# -- synthetic closed forms ---------------------------------------------------------

@pytest.mark.parametrize("f,cfg,expected", [
    (0.5, {"x": 0.5, "m": "b"}, 1.0),
    (0.2, {"x": 0.2, "m": "a"}, 1.0),
    (0.2, {"x": 0.7, "m": "b"}, 0.5),
])
def test_quadratic_valley_values(f, cfg, expected):
    r = evaluate(QV, inst(f), cfg, 0)
    assert r.status == "ok"
    assert r.performance == pytest.approx(expected, abs=1e-15)


def test_cliff_values():
    assert evaluate(CLIFF, inst(0.9), {"x": 0.123, "m": "a"}, 0).performance == 0.0
    assert evaluate(CLIFF, inst(0.9), {"x": 0.123, "m": "b"}, 0).performance == 1.0
    assert evaluate(CLIFF, inst(0.5), {"x": 0.0, "m": "b"}, 0).performance == 1.0


def test_unknown_synthetic():
    with pytest.raises(ValueError):
        synthetic_target("nope")


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from(["a", "b"]))
def test_qv_bounded_by_oracle(f, x, m):
    p = evaluate(QV, inst(f), {"x": x, "m": m}, 0).performance
    assert p <= 1.0
    assert evaluate(QV, inst(f), {"x": f, "m": "a" if f < 0.5 else "b"}, 0).performance == 1.0


def test_target_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        TargetSpec(kind="external", command="")
    with pytest.raises(ValueError):
        TargetSpec(kind="synthetic", synthetic_name="quadratic_valley", cutoff_seconds=0)
    with pytest.raises(ValueError):
        TargetSpec(kind="synthetic", synthetic_name="quadratic_valley", sense="up")
    spec = external("silent.py")
    assert TargetSpec.from_dict(spec.to_dict()) == spec
    assert TargetSpec.from_dict(QV.to_dict()) == QV


# -- external protocol ---------------------------------------------------------

def test_parse_result_last_line_wins():
    out = "ACPF_RESULT status=ok perf=1\nnoise\nACPF_RESULT status=timeout perf=2.5\n"
    assert parse_result(out) == ("timeout", 2.5)
    assert parse_result("nothing here") is None


def test_build_command_active_only():
    space = scond_space()
    target = TargetSpec(kind="external", command="run {instance} --seed {seed} -t {cutoff}",
                        cutoff_seconds=3.0)
    i = Instance("a", (0.0,), "/data/a.cnf")
    off = build_command(target, i, space.make(use_heur=False), 4, space)
    assert off == ["run", "/data/a.cnf", "--seed", "4", "-t", "3.0", "--use_heur=false"]
    on = build_command(target, i, space.make(use_heur=True, w=0.1), 4, space)
    assert on[-2:] == ["--use_heur=true", "--w=0.1"]


def test_external_silent_is_crashed():
    r = evaluate(external("silent.py"), inst(0.1), {"x": 0.5, "m": "a"}, 0, s2_space())
    assert (r.status, r.performance) == ("crashed", -7.0)


def test_external_timeout():
    r = evaluate(external("sleeper.py", cutoff=0.3), inst(0.1), {"x": 0.5, "m": "a"}, 0, s2_space())
    assert (r.status, r.performance) == ("timeout", -7.0)
    assert 0.3 <= r.wall_seconds < 5.0


def test_external_chatty_last_line_and_full_precision():
    x = 0.1 + 0.2
    r = evaluate(external("chatty.py"), inst(0.1), {"x": x, "m": "a"}, 0, s2_space())
    assert r.status == "ok"
    assert r.performance == x


@pytest.mark.parametrize("status,perf,expected", [
    ("timeout", "3.0", ("timeout", -7.0)),
    ("crashed", "3.0", ("crashed", -7.0)),
    ("ok", "nan", ("crashed", -7.0)),
    ("ok", "2.5", ("ok", 2.5)),
])
def test_external_penalty_rule(status, perf, expected):
    r = evaluate(external("echo_args.py", extra=f"{status} {perf}"), inst(0.1),
                 {"x": 0.5, "m": "a"}, 0, s2_space())
    assert (r.status, r.performance) == expected


def test_external_spawn_failure():
    target = TargetSpec(kind="external", command="/nonexistent/binary {instance}")
    with pytest.raises(TargetSpawnError):
        evaluate(target, inst(0.1), {"x": 0.5, "m": "a"}, 0, s2_space())


def test_external_needs_space():
    with pytest.raises(ValueError):
        evaluate(external("silent.py"), inst(0.1), {"x": 0.5, "m": "a"}, 0)


def test_wrapper_module_end_to_end(tmp_path):
    payload = tmp_path / "p.json"
    payload.write_text(json.dumps({"features": [0.2]}))
    target = TargetSpec(kind="external",
                        command=f"{sys.executable} -m acpf.wrapper --family quadratic_valley {{instance}}")
    i = Instance("p", (0.2,), str(payload))
    r = evaluate(target, i, {"x": 0.7, "m": "b"}, 0, s2_space())
    assert r.status == "ok"
    assert r.performance == evaluate(QV, i, {"x": 0.7, "m": "b"}, 0).performance


# -- batches -----------------------------------------------------------------------

def _points(n, seed=0):
    cfgs = sample_uniform(s2_space(), seed, n)
    return [(inst(j / max(n - 1, 1), f"i{j}"), c, 0) for j, c in enumerate(cfgs)]


def test_batch_matches_sequential():
    pts = _points(4)
    par = evaluate_batch(QV, pts, parallelism=2)
    seq = [evaluate(QV, *p) for p in pts]
    assert [r.performance for r in par] == [r.performance for r in seq]
    assert [r.instance_id for r in par] == [p[0].id for p in pts]


def test_batch_empty_and_duplicates():
    assert evaluate_batch(QV, [], parallelism=3) == []
    p = _points(1)[0]
    a, b = evaluate_batch(QV, [p, p])
    assert a.performance == b.performance
    with pytest.raises(ValueError):
        evaluate_batch(QV, [p], parallelism=0)


def test_external_batch_preserves_order():
    space = s2_space()
    target = external("chatty.py")
    pts = [(inst(0.1, f"i{j}"), Configuration(x=j / 10, m="a"), 0) for j in range(4)]
    out = evaluate_batch(target, pts, parallelism=3, space=space)
    assert [r.performance for r in out] == [0.0, 0.1, 0.2, 0.3]


# -- archive -----------------------------------------------------------------------

def _rec(iid="i", x=0.5, seed=0, perf=0.5):
    return EvalRecord(iid, Configuration(x=x, m="a"), seed, perf)


def test_archive_insert_contains():
    arch = EvalArchive(s2_space())
    assert not arch.contains("i", {"x": 0.5, "m": "a"}, 0)
    assert arch.insert(_rec())
    assert arch.contains("i", {"x": 0.5, "m": "a"}, 0)
    assert not arch.insert(_rec(perf=0.9))
    assert len(arch) == 1
    assert arch.insert(_rec(seed=1, perf=0.7))
    assert arch.score("i", {"x": 0.5, "m": "a"}) == pytest.approx(0.6)


def test_archive_minimize_orients():
    arch = EvalArchive(s2_space(), "minimize")
    arch.insert(_rec(perf=3.0))
    assert arch.score("i", {"x": 0.5, "m": "a"}) == -3.0


def test_archive_ndjson_roundtrip(tmp_path):
    arch = EvalArchive(s2_space())
    for j, c in enumerate(sample_uniform(s2_space(), 3, 20)):
        arch.insert(evaluate(QV, inst(j / 19, f"i{j % 5}"), c, j % 2))
    arch.save(tmp_path / "a.ndjson")
    back = EvalArchive.load(tmp_path / "a.ndjson", s2_space())
    assert back.keys() == arch.keys()
    assert back.dumps() == arch.dumps()
    assert [r.performance for r in back] == [r.performance for r in arch]


def test_archive_covering():
    arch = EvalArchive(s2_space())
    arch.insert(_rec("a", 0.1))
    arch.insert(_rec("a", 0.2))
    arch.insert(_rec("b", 0.2))
    assert arch.covering(["a", "b"]) == [Configuration(x=0.2, m="a")]
