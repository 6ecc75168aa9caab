"""
Knowledge models fitted from an evaluation archive.

Four forms are supported, plus a composite:

* :class:`MappingModel`: instance features -> configuration (k-NN labels)
* :class:`SurrogateModel`: (instance, configuration) -> predicted performance (k-NN, IDW)
* :class:`AggregateModel`: configuration -> performance aggregated over the training set
* :class:`PartitionModel`: clusters of training instances, each with a medoid and a tuned configuration
* :class:`CompositeModel`: a one-cluster partition tuned through a surrogate or aggregate

All scores stored in models are oriented (larger is better); ``sense`` records
how to map them back to raw performance.
"""
from __future__ import annotations

import json
import math
import os
import statistics
from collections import Counter
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from ._rng import child_seed, rng_for
from .config_space import Configuration, ConfigurationSpace, encode
from .evaluation import EvalArchive
from .instances import FeatureScaler, Instance, InstanceSet, medoid, pairwise_dist
from .search import SearchResult, argmax_enumerated

SURROGATE_EPS = 1e-9
KMEANS_MAX_ITER = 50


def _as_list(x: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(x)]


def _raw(score: float, sense: str) -> float:
    return score if sense == "maximize" else -score


# -- mapping ------------------------------------------------------------------------

@dataclass
class MappingModel:
    space: ConfigurationSpace
    scaler: FeatureScaler
    ids: list[str]
    features: np.ndarray          # raw features, one row per training instance
    labels: list[Configuration]
    label_scores: list[float]
    k: int = 1
    sense: str = "maximize"
    metadata: dict = field(default_factory=dict)

    kind = "mapping"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        self._x = self.scaler.transform(self.features.reshape(len(self.ids), -1))

    def predict(self, features: Sequence[float]) -> tuple[Configuration, str]:
        """Predicted configuration and the id of the nearest training instance."""
        q = self.scaler.transform(np.asarray(features, dtype=float))
        d = np.sqrt(((self._x - q) ** 2).sum(axis=1))
        order = sorted(range(len(self.ids)), key=lambda i: (d[i], self.ids[i]))
        nearest = order[: self.k]
        if self.k == 1:
            return self.labels[nearest[0]], self.ids[nearest[0]]
        votes = Counter(self.space.key(self.labels[i]) for i in nearest)
        top = max(votes.values())
        winner = min(key for key, n in votes.items() if n == top)
        label = next(self.labels[i] for i in nearest if self.space.key(self.labels[i]) == winner)
        return label, self.ids[nearest[0]]

    def payload(self) -> dict:
        return {"k": self.k, "ids": list(self.ids), "features": _as_list(self.features),
                "labels": [self.space.config_to_json(c) for c in self.labels],
                "label_scores": [float(s) for s in self.label_scores]}

    @classmethod
    def from_payload(cls, p: Mapping, space, scaler, sense, metadata) -> "MappingModel":
        return cls(space, scaler, list(p["ids"]), np.asarray(p["features"], dtype=float),
                   [space.make(c) for c in p["labels"]], list(p["label_scores"]),
                   int(p["k"]), sense, metadata)


def fit_mapping(archive: EvalArchive, instance_set: InstanceSet, k: int = 1,
                scaler: FeatureScaler | None = None) -> MappingModel:
    """Label each instance with its archive-best configuration."""
    if len(instance_set) == 0:
        raise ValueError("cannot fit a mapping on an empty instance set")
    scaler = scaler or instance_set.scaler()
    rows = []
    for inst in sorted(instance_set, key=lambda i: i.id):
        scores = archive.scores(inst.id)
        if not scores:
            raise ValueError(f"instance {inst.id!r} has no archive records")
        pairs = sorted(scores.values(), key=lambda cs: archive.space.key(cs[0]))
        label = argmax_enumerated(pairs, archive.space)
        rows.append((inst, label, scores[archive.space.key(label)][1]))
    return MappingModel(
        space=archive.space, scaler=scaler, ids=[r[0].id for r in rows],
        features=np.array([r[0].features for r in rows], dtype=float).reshape(len(rows), -1),
        labels=[r[1] for r in rows], label_scores=[float(r[2]) for r in rows],
        k=k, sense=archive.sense)


# -- surrogate ----------------------------------------------------------------------

@dataclass
class SurrogateModel:
    space: ConfigurationSpace
    scaler: FeatureScaler
    instance_ids: list[str]
    features: np.ndarray        # raw instance features per training point
    configurations: list[Configuration]
    scores: np.ndarray          # oriented
    k: int = 5
    sense: str = "maximize"
    metadata: dict = field(default_factory=dict)

    kind = "surrogate"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.configurations:
            raise ValueError("surrogate needs at least one training point")
        n = len(self.configurations)
        self.features = np.asarray(self.features, dtype=float).reshape(n, -1)
        self.scores = np.asarray(self.scores, dtype=float)
        enc = np.array([encode(self.space, c) for c in self.configurations])
        self._x = np.hstack([self.scaler.transform(self.features), enc])

    @property
    def joint_dim(self) -> int:
        return self._x.shape[1]

    def joint(self, features: Sequence[float], cfgs: Sequence[Mapping[str, Any]]) -> np.ndarray:
        f = self.scaler.transform(np.asarray(features, dtype=float))
        enc = np.array([encode(self.space, c) for c in cfgs]).reshape(len(cfgs), -1)
        return np.hstack([np.tile(f, (len(cfgs), 1)), enc])

    def predict_scores(self, features: Sequence[float],
                       cfgs: Sequence[Mapping[str, Any]]) -> np.ndarray:
        """Oriented predictions for several configurations on one instance."""
        if len(features) != self.scaler.dim:
            raise ValueError(f"feature dimension {len(features)} does not match model ({self.scaler.dim})")
        return self.predict_joint(self.joint(features, cfgs))

    def predict_joint(self, q: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(q)
        if q.shape[1] != self.joint_dim:
            raise ValueError(f"joint dimension {q.shape[1]} does not match model ({self.joint_dim})")
        d = pairwise_dist(q, self._x)
        k = min(self.k, len(self.scores))
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        out = np.empty(len(q))
        for row in range(len(q)):
            idx = order[row]
            if k == 1:
                out[row] = self.scores[idx[0]]
                continue
            w = 1.0 / (SURROGATE_EPS + d[row, idx])
            out[row] = float(np.dot(w, self.scores[idx]) / w.sum())
        return out

    def predict_score(self, features: Sequence[float], cfg: Mapping[str, Any]) -> float:
        return float(self.predict_scores(features, [cfg])[0])

    def predict(self, features: Sequence[float], cfg: Mapping[str, Any]) -> float:
        """Predicted raw performance (in the target's own sense)."""
        return _raw(self.predict_score(features, cfg), self.sense)

    def payload(self) -> dict:
        return {"k": self.k, "instance_ids": list(self.instance_ids),
                "features": _as_list(self.features),
                "configurations": [self.space.config_to_json(c) for c in self.configurations],
                "scores": [float(s) for s in self.scores]}

    @classmethod
    def from_payload(cls, p: Mapping, space, scaler, sense, metadata) -> "SurrogateModel":
        return cls(space, scaler, list(p["instance_ids"]), np.asarray(p["features"], dtype=float),
                   [space.make(c) for c in p["configurations"]],
                   np.asarray(p["scores"], dtype=float), int(p["k"]), sense, metadata)


def fit_surrogate(archive: EvalArchive, instance_set: InstanceSet, k: int = 5,
                  scaler: FeatureScaler | None = None) -> SurrogateModel:
    """k-NN surrogate over the joint (normalized features ++ encoded configuration) space."""
    scaler = scaler or instance_set.scaler()
    rows = []
    for inst in sorted(instance_set, key=lambda i: i.id):
        if inst.dim != scaler.dim:
            raise ValueError(f"instance {inst.id!r}: feature dimension mismatch")
        for ckey, (cfg, score) in sorted(archive.scores(inst.id).items()):
            rows.append((inst, cfg, score))
    if not rows:
        raise ValueError("archive has no records for the given instances")
    return SurrogateModel(
        space=archive.space, scaler=scaler, instance_ids=[r[0].id for r in rows],
        features=np.array([r[0].features for r in rows], dtype=float).reshape(len(rows), -1),
        configurations=[r[1] for r in rows], scores=np.array([r[2] for r in rows]),
        k=k, sense=archive.sense)


# -- aggregate ----------------------------------------------------------------------

@dataclass
class AggregateModel:
    space: ConfigurationSpace
    configurations: list[Configuration]
    scores: list[float]       # oriented aggregate per configuration
    agg: str = "mean"
    sense: str = "maximize"
    instance_ids: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    kind = "aggregate"

    def __post_init__(self) -> None:
        if len(self.configurations) != len(self.scores):
            raise ValueError("configurations/scores length mismatch")

    def score(self, cfg: Mapping[str, Any]) -> float:
        key = self.space.key(cfg)
        for c, s in zip(self.configurations, self.scores):
            if self.space.key(c) == key:
                return s
        raise KeyError(f"configuration not scored: {cfg!r}")

    def best(self) -> tuple[Configuration, float]:
        cfg = argmax_enumerated(list(zip(self.configurations, self.scores)), self.space)
        return cfg, self.score(cfg)

    def payload(self) -> dict:
        return {"agg": self.agg, "instance_ids": list(self.instance_ids),
                "configurations": [self.space.config_to_json(c) for c in self.configurations],
                "scores": [float(s) for s in self.scores]}

    @classmethod
    def from_payload(cls, p: Mapping, space, scaler, sense, metadata) -> "AggregateModel":
        return cls(space, [space.make(c) for c in p["configurations"]], list(p["scores"]),
                   p["agg"], sense, list(p["instance_ids"]), metadata)


def aggregate_values(values: Sequence[float], kind: str) -> float:
    if kind == "mean":
        return math.fsum(values) / len(values)
    if kind == "median":
        return float(statistics.median(values))
    raise ValueError(f"unknown aggregation {kind!r}")


def aggregate(source: Union[EvalArchive, SurrogateModel], configurations: Sequence[Mapping],
              instance_set: InstanceSet, kind: str = "mean") -> AggregateModel:
    """Score each configuration by aggregating performance over ``instance_set``.

    With an archive every (instance, configuration) pair must have been
    evaluated; with a surrogate, predictions stand in for evaluations.
    """
    if kind not in ("mean", "median"):
        raise ValueError(f"unknown aggregation {kind!r}")
    insts = list(instance_set)
    if not insts:
        raise ValueError("aggregate over an empty instance set")
    space = source.space
    cfgs = [Configuration(c) for c in configurations]
    cfgs.sort(key=space.key)
    scores = []
    if isinstance(source, EvalArchive):
        for cfg in cfgs:
            vals = []
            for inst in insts:
                s = source.score(inst.id, cfg)
                if s is None:
                    raise ValueError(f"configuration {cfg!r} has no record on instance {inst.id!r}")
                vals.append(s)
            scores.append(aggregate_values(vals, kind))
    else:
        per_inst = np.array([source.predict_scores(inst.features, cfgs) for inst in insts])
        scores = [aggregate_values(list(per_inst[:, j]), kind) for j in range(len(cfgs))]
    return AggregateModel(space, cfgs, [float(s) for s in scores], kind, source.sense,
                          [i.id for i in insts])


# -- partition ----------------------------------------------------------------------

@dataclass
class Cluster:
    member_ids: list[str]
    member_features: np.ndarray
    representative_id: str
    representative_features: tuple[float, ...]
    configuration: Configuration
    score: float

    def to_dict(self, space: ConfigurationSpace) -> dict:
        return {"member_ids": list(self.member_ids),
                "member_features": _as_list(self.member_features),
                "representative_id": self.representative_id,
                "representative_features": [float(v) for v in self.representative_features],
                "configuration": space.config_to_json(self.configuration),
                "score": float(self.score)}

    @classmethod
    def from_dict(cls, d: Mapping, space: ConfigurationSpace) -> "Cluster":
        return cls(list(d["member_ids"]), np.asarray(d["member_features"], dtype=float),
                   d["representative_id"], tuple(d["representative_features"]),
                   space.make(d["configuration"]), float(d["score"]))


@dataclass
class PartitionModel:
    space: ConfigurationSpace
    clusters: list[Cluster]
    scaler: FeatureScaler | None
    sense: str = "maximize"
    metadata: dict = field(default_factory=dict)

    kind = "partition"

    def __post_init__(self) -> None:
        if not self.clusters:
            raise ValueError("partition needs at least one cluster")
        seen: set[str] = set()
        for c in self.clusters:
            if not c.member_ids:
                raise ValueError("empty cluster")
            overlap = seen.intersection(c.member_ids)
            if overlap:
                raise ValueError(f"clusters overlap on {sorted(overlap)}")
            seen.update(c.member_ids)

    @property
    def C(self) -> int:
        return len(self.clusters)

    @property
    def member_ids(self) -> list[str]:
        return [m for c in self.clusters for m in c.member_ids]

    def payload(self) -> dict:
        return {"clusters": [c.to_dict(self.space) for c in self.clusters]}

    @classmethod
    def from_payload(cls, p: Mapping, space, scaler, sense, metadata) -> "PartitionModel":
        return cls(space, [Cluster.from_dict(c, space) for c in p["clusters"]], scaler, sense, metadata)


Tuner = Callable[[Sequence[Instance], int], SearchResult]


def kmeans(x: np.ndarray, C: int, seed: int, max_iter: int = KMEANS_MAX_ITER) -> np.ndarray:
    """Lloyd's k-means with seeded farthest-point initialization.

    Empty clusters are repaired by moving in the point of the largest cluster
    that lies farthest from its centroid. Returns one label per row.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if not 1 <= C <= n:
        raise ValueError(f"cluster count {C} outside [1, {n}]")
    first = int(rng_for(seed).integers(n))
    centers = [first]
    mind = np.sqrt(((x - x[first]) ** 2).sum(axis=1))
    while len(centers) < C:
        masked = mind.copy()
        masked[centers] = -1.0
        nxt = int(np.argmax(masked))
        centers.append(nxt)
        mind = np.minimum(mind, np.sqrt(((x - x[nxt]) ** 2).sum(axis=1)))
    cent = x[centers].copy()
    labels = np.full(n, -1)
    for _ in range(max_iter):
        new = _assign(pairwise_dist(x, cent), labels, C)
        new = _repair_empty(x, new, C)
        if np.array_equal(new, labels):
            break
        labels = new
        cent = np.array([x[labels == i].mean(axis=0) for i in range(C)])
    return labels


def _assign(d: np.ndarray, labels: np.ndarray, C: int) -> np.ndarray:
    """Nearest centroid; an exact tie goes to the currently smaller cluster.

    Uniform feature grids produce ties whose arbitrary resolution can freeze
    Lloyd in an unbalanced split; sending the point to the smaller cluster
    always lowers the within-cluster sum of squares.
    """
    sizes = np.bincount(labels[labels >= 0], minlength=C)
    out = np.argmin(d, axis=1)
    near = d <= d.min(axis=1, keepdims=True) + 1e-12
    for i in np.flatnonzero(near.sum(axis=1) > 1):
        tied = np.flatnonzero(near[i])
        out[i] = min(tied, key=lambda c: (sizes[c] - (labels[i] == c), c))
    return out


def _repair_empty(x: np.ndarray, labels: np.ndarray, C: int) -> np.ndarray:
    labels = labels.copy()
    while True:
        sizes = np.bincount(labels, minlength=C)
        empty = np.flatnonzero(sizes == 0)
        if len(empty) == 0:
            return labels
        big = int(np.argmax(sizes))
        idx = np.flatnonzero(labels == big)
        centroid = x[idx].mean(axis=0)
        far = idx[int(np.argmax(((x[idx] - centroid) ** 2).sum(axis=1)))]
        labels[far] = int(empty[0])


def _groups_in_order(ids: Sequence[str], labels: Sequence[int]) -> list[list[str]]:
    groups: dict[int, list[str]] = {}
    for iid, lab in zip(ids, labels):
        groups.setdefault(int(lab), []).append(iid)
    return list(groups.values())  # insertion order = first appearance


def _make_cluster(iset: InstanceSet, members: list[str], scaler: FeatureScaler,
                  cfg: Configuration, score: float) -> Cluster:
    rep = medoid(iset, members, scaler)
    feats = np.array([iset[m].features for m in members], dtype=float).reshape(len(members), -1)
    return Cluster(members, feats, rep.id, rep.features, cfg, float(score))


def cluster_instances(instance_set: InstanceSet, scaler: FeatureScaler, C: int,
                      seed: int) -> list[list[str]]:
    """k-means groups of instance ids, ordered by first member position."""
    if not 1 <= C <= len(instance_set):
        raise ValueError(f"cluster count {C} outside [1, {len(instance_set)}]")
    labels = kmeans(scaler.transform(instance_set.features), C, seed)
    return _groups_in_order(instance_set.ids, labels)


def fit_partition(instance_set: InstanceSet, scaler: FeatureScaler, C: int, tuner: Tuner,
                  seed: int, *, space: ConfigurationSpace,
                  sense: str = "maximize") -> PartitionModel:
    """Cluster the training set and tune one configuration per cluster.

    ``tuner(members, seed)`` solves the per-cluster maximization of aggregated
    performance and returns a :class:`SearchResult` whose incumbent becomes the
    cluster's configuration. C=1 gives the per-problem model; C=len(instance_set)
    gives one cluster per instance.
    """
    groups = cluster_instances(instance_set, scaler, C, seed)
    clusters = []
    for i, members in enumerate(groups):
        result = tuner([instance_set[m] for m in members], child_seed(seed, 1, i))
        clusters.append(_make_cluster(instance_set, members, scaler, result.best, result.best_score))
    model = PartitionModel(space, clusters, scaler, sense)
    _check_cover(model, instance_set)
    return model


def _check_cover(model: PartitionModel, instance_set: InstanceSet) -> None:
    if sorted(model.member_ids) != sorted(instance_set.ids):
        raise AssertionError("partition does not cover the training set exactly")


def seed_partition_from_population(
        instance_set: InstanceSet, scaler: FeatureScaler,
        population: Sequence[tuple[Configuration, Mapping[str, float]]],
        space: ConfigurationSpace, sense: str = "maximize") -> PartitionModel:
    """One cluster per population member that is best on at least one instance."""
    if not population:
        raise ValueError("empty population")
    groups: dict[int, list[str]] = {}
    for inst in instance_set:
        best_j, best_s = 0, -math.inf
        for j, (_, scores) in enumerate(population):
            if inst.id not in scores:
                raise ValueError(f"population member {j} has no score on {inst.id!r}")
            if scores[inst.id] > best_s:
                best_j, best_s = j, scores[inst.id]
        groups.setdefault(best_j, []).append(inst.id)
    clusters = []
    for j in sorted(groups):
        cfg, scores = population[j]
        members = groups[j]
        score = math.fsum(scores[m] for m in members) / len(members)
        clusters.append(_make_cluster(instance_set, members, scaler, Configuration(cfg), score))
    model = PartitionModel(space, clusters, scaler, sense, {"seeded_from": "population"})
    _check_cover(model, instance_set)
    return model


# -- composite ----------------------------------------------------------------------

@dataclass
class CompositeModel:
    """Per-problem partition whose configuration was chosen through a helper model."""

    partition: PartitionModel
    helper: Union[SurrogateModel, AggregateModel]
    metadata: dict = field(default_factory=dict)

    kind = "composite"

    @property
    def space(self) -> ConfigurationSpace:
        return self.partition.space

    @property
    def scaler(self) -> FeatureScaler | None:
        return self.partition.scaler

    @property
    def sense(self) -> str:
        return self.partition.sense

    def payload(self) -> dict:
        return {"partition": self.partition.payload(), "helper_kind": self.helper.kind,
                "helper": self.helper.payload()}

    @classmethod
    def from_payload(cls, p: Mapping, space, scaler, sense, metadata) -> "CompositeModel":
        part = PartitionModel.from_payload(p["partition"], space, scaler, sense, {})
        helper_cls = _KINDS[p["helper_kind"]]
        helper = helper_cls.from_payload(p["helper"], space, scaler, sense, {})
        return cls(part, helper, metadata)


Model = Union[MappingModel, SurrogateModel, AggregateModel, PartitionModel, CompositeModel]

_KINDS: dict[str, Any] = {
    "mapping": MappingModel,
    "surrogate": SurrogateModel,
    "aggregate": AggregateModel,
    "partition": PartitionModel,
    "composite": CompositeModel,
}


# -- persistence --------------------------------------------------------------------

def model_to_dict(model: Model, scenario_hash: str = "") -> dict:
    scaler = getattr(model, "scaler", None)
    return {"kind": model.kind, "space": model.space.to_list(), "sense": model.sense,
            "scaler": scaler.to_dict() if scaler is not None else None,
            "scenario_hash": scenario_hash or model.metadata.get("scenario_hash", ""),
            "metadata": {k: v for k, v in model.metadata.items() if k != "scenario_hash"},
            "payload": model.payload()}


def model_from_dict(d: Mapping) -> Model:
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    space = ConfigurationSpace.from_list(d["space"])
    scaler = FeatureScaler.from_dict(d["scaler"]) if d.get("scaler") else None
    metadata = dict(d.get("metadata", {}))
    if d.get("scenario_hash"):
        metadata["scenario_hash"] = d["scenario_hash"]
    return _KINDS[kind].from_payload(d["payload"], space, scaler, d.get("sense", "maximize"), metadata)


def dumps_model(model: Model, scenario_hash: str = "") -> str:
    return json.dumps(model_to_dict(model, scenario_hash), sort_keys=True, indent=1) + "\n"


def save_model(model: Model, path: str | os.PathLike, scenario_hash: str = "") -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(model, scenario_hash))


def load_model(path: str | os.PathLike) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
