"""
Recommenders: turn a fitted model into a configuration for a new instance.
"""
from __future__ import annotations

import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config_space import TOO_LARGE, Configuration, ConfigurationSpace, grid
from .instances import FeatureScaler, Instance
from .models import (AggregateModel, CompositeModel, MappingModel, Model, PartitionModel,
                     SurrogateModel)
from .search import Objective, argmax_enumerated, local_search


class MissingInputError(ValueError):
    """A recommender was called without an auxiliary input its model kind needs."""


@dataclass(frozen=True)
class CandidatePool:
    """Finite candidate set, or a directive to generate candidates from the space.

    Exactly one of ``configurations``, ``grid_steps`` or ``search_budget`` is set.
    """

    space: ConfigurationSpace
    configurations: tuple[Configuration, ...] | None = None
    grid_steps: int | None = None
    search_budget: int | None = None

    def __post_init__(self) -> None:
        given = [self.configurations is not None, self.grid_steps is not None,
                 self.search_budget is not None]
        if sum(given) != 1:
            raise ValueError("candidate pool needs exactly one of configurations/grid_steps/search_budget")
        if self.configurations is not None:
            cfgs = tuple(self.space.make(c) for c in self.configurations)
            if not cfgs:
                raise ValueError("empty candidate pool")
            if len({self.space.key(c) for c in cfgs}) != len(cfgs):
                raise ValueError("duplicate configurations in candidate pool")
            object.__setattr__(self, "configurations", cfgs)
        if self.search_budget is not None and self.search_budget < 1:
            raise ValueError("search budget must be >= 1")

    @property
    def is_search(self) -> bool:
        return self.search_budget is not None

    def candidates(self) -> list[Configuration]:
        if self.configurations is not None:
            return list(self.configurations)
        if self.grid_steps is not None:
            cfgs = grid(self.space, self.grid_steps)
            if cfgs is TOO_LARGE:
                raise ValueError("grid candidate pool is too large")
            return cfgs
        raise ValueError("search pools have no explicit candidate list")

    def to_dict(self) -> dict:
        if self.configurations is not None:
            return {"configurations": [self.space.config_to_json(c) for c in self.configurations]}
        if self.grid_steps is not None:
            return {"grid_steps": self.grid_steps}
        return {"search": {"budget": self.search_budget}}

    @classmethod
    def from_dict(cls, d: Mapping, space: ConfigurationSpace) -> "CandidatePool":
        if "configurations" in d:
            return cls(space, configurations=tuple(d["configurations"]))
        if "grid_steps" in d:
            return cls(space, grid_steps=int(d["grid_steps"]))
        if "search" in d:
            return cls(space, search_budget=int(d["search"].get("budget", 200)))
        raise ValueError(f"cannot parse candidate pool {dict(d)!r}")


@dataclass(frozen=True)
class Recommendation:
    configuration: Configuration
    source: str
    detail: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def to_dict(self, space: ConfigurationSpace) -> dict:
        return {"configuration": space.config_to_json(self.configuration), "source": self.source,
                "detail": dict(self.detail), "elapsed_seconds": self.elapsed_seconds}


def _features(instance: Instance | Sequence[float]) -> tuple[float, ...]:
    if isinstance(instance, Instance):
        return instance.features
    return tuple(float(v) for v in instance)


def recommend_mapping(model: MappingModel, instance: Instance | Sequence[float]) -> Recommendation:
    feats = _features(instance)
    if len(feats) != model.scaler.dim:
        raise ValueError(f"feature dimension {len(feats)} does not match model ({model.scaler.dim})")
    cfg, nearest = model.predict(feats)
    return Recommendation(cfg, "mapping", {"nearest_id": nearest})


def recommend_surrogate(model: SurrogateModel, instance: Instance | Sequence[float],
                        pool: CandidatePool | Sequence[Mapping[str, Any]],
                        search_budget: int | None = None, seed: int = 0) -> Recommendation:
    """Maximize predicted performance over the pool (or by local search for search pools)."""
    feats = _features(instance)
    if not isinstance(pool, CandidatePool):
        pool = CandidatePool(model.space, configurations=tuple(pool))
    if pool.is_search:
        budget = search_budget or pool.search_budget
        obj = Objective(lambda c: model.predict_score(feats, c), budget)
        res = local_search(obj, model.space, model.space.default(), seed)
        cfg, score = res.best, res.best_score
    else:
        cands = pool.candidates()
        scores = model.predict_scores(feats, cands)
        cfg = argmax_enumerated(list(zip(cands, scores)), model.space)
        score = float(scores[[model.space.key(c) for c in cands].index(model.space.key(cfg))])
    perf = score if model.sense == "maximize" else -score
    return Recommendation(cfg, "surrogate", {"predicted_performance": float(perf)})


def cluster_of(model: PartitionModel, features: Sequence[float], scaler: FeatureScaler,
               mode: str = "representative") -> int:
    q = scaler.transform(np.asarray(features, dtype=float))
    best_i, best_d = 0, np.inf
    for i, cl in enumerate(model.clusters):
        if mode == "representative":
            d = float(np.linalg.norm(scaler.transform(cl.representative_features) - q))
        elif mode == "average":
            d = float(np.linalg.norm(scaler.transform(cl.member_features) - q, axis=1).mean())
        else:
            raise ValueError(f"unknown partition mode {mode!r}")
        if d < best_d:
            best_i, best_d = i, d
    return best_i


def recommend_partition(model: PartitionModel, instance: Instance | Sequence[float],
                        scaler: FeatureScaler | None, mode: str = "representative") -> Recommendation:
    """Configuration of the cluster closest to the instance (smallest index on ties)."""
    if scaler is None:
        raise MissingInputError("partition recommendation needs a feature scaler")
    feats = _features(instance)
    if len(feats) != scaler.dim:
        raise ValueError(f"feature dimension {len(feats)} does not match scaler ({scaler.dim})")
    if model.C == 1:
        h = 0
    else:
        h = cluster_of(model, feats, scaler, mode)
    return Recommendation(model.clusters[h].configuration, "partition", {"cluster": h})


def recommend(model: Model, instance: Instance | Sequence[float],
              pool: CandidatePool | Sequence[Mapping[str, Any]] | None = None,
              scaler: FeatureScaler | None = None, mode: str = "representative",
              seed: int = 0) -> Recommendation:
    """Dispatch on the model kind and time the call."""
    start = time.perf_counter()
    if isinstance(model, MappingModel):
        rec = recommend_mapping(model, instance)
    elif isinstance(model, SurrogateModel):
        if pool is None:
            raise MissingInputError("surrogate recommendation needs a candidate pool")
        rec = recommend_surrogate(model, instance, pool, seed=seed)
    elif isinstance(model, AggregateModel):
        cfg, score = model.best()
        perf = score if model.sense == "maximize" else -score
        rec = Recommendation(cfg, "aggregate", {"aggregate_performance": float(perf)})
    elif isinstance(model, PartitionModel):
        rec = recommend_partition(model, instance, scaler or model.scaler, mode)
    elif isinstance(model, CompositeModel):
        inner = recommend_partition(model.partition, instance, scaler or model.scaler, mode)
        rec = Recommendation(inner.configuration, "composite", inner.detail)
    else:
        raise TypeError(f"not a model: {type(model).__name__}")
    return Recommendation(rec.configuration, rec.source, rec.detail, time.perf_counter() - start)
