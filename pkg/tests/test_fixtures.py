from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acpf.config_space import Configuration, sample_uniform
from acpf.evaluation import evaluate
from acpf.fixtures import family, make_suite, random_instances, regret, s2_space


def test_train_grid():
    suite = make_suite("quadratic", 30, 5, 0)
    assert [i.features[0] for i in suite.train] == pytest.approx([j / 29 for j in range(30)], abs=1e-15)
    assert suite.train.ids[0] == "train-0000"


def test_single_training_instance():
    assert make_suite("cliff", 1, 1, 0).train[0].features == (0.5,)


def test_suite_deterministic_and_seeded():
    a, b, c = make_suite("quadratic", 5, 20, 3), make_suite("quadratic", 5, 20, 3), make_suite("quadratic", 5, 20, 4)
    assert list(a.test) == list(b.test)
    assert list(a.test) != list(c.test)


def test_suite_errors():
    with pytest.raises(ValueError):
        make_suite("sat", 3, 3, 0)
    with pytest.raises(ValueError):
        make_suite("quadratic", 0, 3, 0)


def test_qv_oracle():
    cfg, best = family("quadratic").oracle(family("quadratic").instance("q", 0.2))
    assert (cfg, best) == (Configuration(x=0.2, m="a"), 1.0)


@pytest.mark.parametrize("name", ["quadratic", "cliff"])
def test_oracle_self_consistency(name):
    fam = family(name)
    for inst in random_instances(name, 100, 9):
        cfg, best = fam.oracle(inst)
        assert abs(evaluate(fam.target, inst, cfg, 0).performance - best) <= 1e-12
        assert regret(fam.oracle, inst, cfg, fam.target) == 0.0


def test_regret_example():
    fam = family("quadratic")
    inst = fam.instance("q", 0.2)
    assert regret(fam.oracle, inst, {"x": 0.7, "m": "b"}, fam.target) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["quadratic", "cliff"]), st.floats(0, 1), st.integers(0, 10**6))
def test_regret_nonnegative(name, f, seed):
    fam = family(name)
    cfg = sample_uniform(s2_space(), seed, 1)[0]
    assert regret(fam.oracle, fam.instance("q", f), cfg, fam.target) >= 0.0


def test_per_problem_floor_closed_form():
    # best single configuration on uniform f: x=0.5 and either m, regret E[(0.5-f)^2] + 0.25/2
    fs = np.random.default_rng(0).uniform(0, 1, 20000)
    fam = family("quadratic")
    regrets = [regret(fam.oracle, fam.instance("q", f), {"x": 0.5, "m": "b"}, fam.target) for f in fs]
    assert np.mean(regrets) == pytest.approx(1 / 12 + 0.125, abs=0.005)
