"""
Synthetic problem families with closed-form oracles.

``quadratic``: p = 1 - (x - f)^2 - 0.25 * [m != m*(f)], m*(f) = a if f < 0.5 else b.
``cliff``:     p = 1 if m == m*(f) else 0.

Both live on the two-parameter space ``x in [0, 1]``, ``m in {a, b}`` and use a
single instance feature ``f in [0, 1]``.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from ._rng import rng_for
from .config_space import Configuration, ConfigurationSpace, ParameterSpec
from .evaluation import TargetSpec, evaluate, synthetic_target
from .instances import Instance, InstanceSet

FAMILIES = ("quadratic", "cliff")
_TARGETS = {"quadratic": "quadratic_valley", "cliff": "cliff"}


def s2_space() -> ConfigurationSpace:
    return ConfigurationSpace((
        ParameterSpec("x", "real", (0.0, 1.0), 0.5),
        ParameterSpec("m", "categorical", ("a", "b"), "a"),
    ))


def _best_m(f: float) -> str:
    return "a" if f < 0.5 else "b"


def quadratic_oracle(inst: Instance) -> tuple[Configuration, float]:
    f = inst.features[0]
    return Configuration(x=float(f), m=_best_m(f)), 1.0


def cliff_oracle(inst: Instance) -> tuple[Configuration, float]:
    f = inst.features[0]
    # any x is optimal; report the default
    return Configuration(x=0.5, m=_best_m(f)), 1.0


Oracle = Callable[[Instance], tuple[Configuration, float]]


@dataclass(frozen=True)
class SyntheticFamily:
    name: str
    space: ConfigurationSpace
    target: TargetSpec
    oracle: Oracle

    def instance(self, iid: str, f: float) -> Instance:
        return Instance(iid, (float(f),), {"features": [float(f)]})


def family(name: str) -> SyntheticFamily:
    if name == "quadratic":
        oracle = quadratic_oracle
    elif name == "cliff":
        oracle = cliff_oracle
    else:
        raise ValueError(f"unknown synthetic family {name!r}")
    return SyntheticFamily(name, s2_space(), synthetic_target(_TARGETS[name]), oracle)


@dataclass(frozen=True)
class Suite:
    train: InstanceSet
    test: InstanceSet
    target: TargetSpec
    oracle: Oracle
    space: ConfigurationSpace
    name: str


def train_grid(n: int) -> np.ndarray:
    return np.array([0.5]) if n == 1 else np.linspace(0.0, 1.0, n)


def make_suite(name: str, n_train: int, n_test: int, seed: int) -> Suite:
    """Training features on a uniform grid of [0, 1]; test features seeded uniform draws."""
    if n_train < 1 or n_test < 1:
        raise ValueError("instance counts must be >= 1")
    fam = family(name)
    train = InstanceSet(tuple(fam.instance(f"train-{i:04d}", f)
                              for i, f in enumerate(train_grid(n_train))))
    draws = rng_for(seed, 1).uniform(0.0, 1.0, n_test)
    test = InstanceSet(tuple(fam.instance(f"test-{i:04d}", f) for i, f in enumerate(draws)))
    return Suite(train, test, fam.target, fam.oracle, fam.space, name)


def random_instances(name: str, n: int, seed: int, prefix: str = "inst") -> list[Instance]:
    fam = family(name)
    draws = rng_for(seed, 2).uniform(0.0, 1.0, n)
    return [fam.instance(f"{prefix}-{i:04d}", f) for i, f in enumerate(draws)]


def regret(oracle: Oracle, instance: Instance, cfg: Mapping[str, Any], target: TargetSpec) -> float:
    """Oracle-optimal score minus the achieved score (both oriented larger-is-better)."""
    _, best = oracle(instance)
    achieved = evaluate(target, instance, cfg, 0).performance
    return target.orient(best) - target.orient(achieved)
