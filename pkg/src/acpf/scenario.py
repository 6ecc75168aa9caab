"""
Scenario files: a single JSON document declaring the parameter space, the
target, the training instances, the budget and the sampling/model defaults.

Minimal synthetic example::

    {
      "parameters": [
        {"name": "x", "kind": "real", "domain": [0, 1], "default": 0.5},
        {"name": "m", "kind": "categorical", "domain": ["a", "b"], "default": "a"}
      ],
      "target": {"kind": "synthetic", "name": "quadratic_valley",
                 "sense": "maximize", "penalized_value": -1.0},
      "instances": {"synthetic": {"family": "quadratic", "count": 30, "seed": 0}},
      "budget": {"max_evaluations": 600}
    }
"""
from __future__ import annotations

import hashlib
import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

from .config_space import ConfigurationSpace
from .evaluation import TargetSpec
from .fixtures import FAMILIES, family, train_grid
from .instances import FeatureScaler, InstanceError, InstanceSet, load_instance_set
from .kep import Budget, SamplingStrategy
from .recommend import CandidatePool


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    space: ConfigurationSpace
    target: TargetSpec
    instances: InstanceSet
    budget: Budget
    strategy: SamplingStrategy = field(default_factory=SamplingStrategy)
    pool: CandidatePool | None = None
    scaler: FeatureScaler | None = None
    mapping_k: int = 1
    surrogate_k: int = 5
    aggregation: str = "mean"
    tuner: str = "local"
    population_size: int = 8
    exploration_rate: float = 0.2
    eval_seed: int = 0
    parallelism: int = 1
    hash: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.scaler is None and len(self.instances):
            self.scaler = self.instances.scaler()
        if self.tuner not in ("local", "evolutionary"):
            raise ScenarioError(f"unknown tuner {self.tuner!r}")
        if self.aggregation not in ("mean", "median"):
            raise ScenarioError(f"unknown aggregation {self.aggregation!r}")
        if not 0.0 <= self.exploration_rate <= 1.0:
            raise ScenarioError("exploration_rate must lie in [0, 1]")
        if self.target.kind == "synthetic" and self.instances.dim < 1:
            raise ScenarioError("synthetic targets need at least one instance feature")
        if not self.hash:
            self.hash = scenario_hash(self.raw) if self.raw else ""


def scenario_hash(raw: Mapping) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True).encode()).hexdigest()[:16]


def _synthetic_instances(block: Mapping) -> InstanceSet:
    name = block.get("family", "quadratic")
    if name not in FAMILIES:
        raise ScenarioError(f"unknown synthetic family {name!r}")
    count = int(block.get("count", 30))
    if count < 1:
        raise ScenarioError("synthetic instance count must be >= 1")
    fam = family(name)
    return InstanceSet(tuple(fam.instance(f"train-{i:04d}", f) for i, f in enumerate(train_grid(count))))


def scenario_from_dict(raw: Mapping, base_dir: str = ".", **overrides: Any) -> Scenario:
    """Build a :class:`Scenario`; every problem is reported as :class:`ScenarioError`."""
    try:
        if "parameters" not in raw:
            raise ScenarioError("scenario has no 'parameters'")
        space = ConfigurationSpace.from_list(raw["parameters"])
        target = TargetSpec.from_dict(raw.get("target", {}))
        inst_block = raw.get("instances")
        if not inst_block:
            raise ScenarioError("scenario has no 'instances'")
        if "synthetic" in inst_block:
            instances = _synthetic_instances(inst_block["synthetic"])
        else:
            manifest = inst_block.get("manifest")
            if not manifest:
                raise ScenarioError("instances need a 'manifest' or 'synthetic' block")
            if not os.path.isabs(manifest):
                manifest = os.path.join(base_dir, manifest)
            instances = load_instance_set(manifest, inst_block.get("records"))
        budget = Budget(**{k: v for k, v in raw.get("budget", {"max_evaluations": 100}).items()
                           if k in ("max_evaluations", "max_iterations", "max_wall_seconds")})
        strategy = SamplingStrategy(**raw.get("strategy", {}))
        pool = CandidatePool.from_dict(raw["pool"], space) if raw.get("pool") else None
        models = raw.get("models", {})
        tuner = raw.get("tuner", {})
        kwargs = dict(
            space=space, target=target, instances=instances, budget=budget, strategy=strategy,
            pool=pool, mapping_k=int(models.get("mapping_k", 1)),
            surrogate_k=int(models.get("surrogate_k", 5)),
            aggregation=models.get("aggregation", "mean"),
            tuner=tuner.get("search", "local"),
            population_size=int(tuner.get("population_size", 8)),
            exploration_rate=float(raw.get("exploration_rate", 0.2)),
            eval_seed=int(raw.get("eval_seed", 0)),
            parallelism=int(raw.get("parallelism", 1)),
            raw=dict(raw))
        kwargs.update(overrides)
        return Scenario(**kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError, KeyError, InstanceError) as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from exc


def load_scenario(path: str | os.PathLike, **overrides: Any) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw, os.path.dirname(os.path.abspath(path)), **overrides)


def synthetic_scenario_dict(family_name: str, n_train: int, budget_evals: int = 600,
                            pool: Mapping | None = None) -> dict:
    """Scenario document for one of the built-in synthetic families."""
    fam = family(family_name)
    raw = {
        "parameters": fam.space.to_list(),
        "target": fam.target.to_dict(),
        "instances": {"synthetic": {"family": family_name, "count": n_train}},
        "budget": {"max_evaluations": budget_evals},
        "strategy": {"name": "epsilon_greedy", "epsilon": 0.3, "batch_size": 8},
        "pool": dict(pool) if pool else {"grid_steps": 11},
    }
    return raw
