"""
Problem instances, training sets and the instance distance.

Instances carry a fixed-dimension numeric feature vector; the distance between
two instances is the Euclidean distance between min-max normalized features.
The normalization statistics are frozen from the training set.
"""
from __future__ import annotations

import csv
import math
import os
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class InstanceError(ValueError):
    """Malformed instance data; the message names the offending id."""


@dataclass(frozen=True, eq=False)
class Instance:
    id: str
    features: tuple[float, ...]
    payload: str | Mapping[str, Any] | None = None

    def __post_init__(self) -> None:
        feats = tuple(float(f) for f in self.features)
        if not all(math.isfinite(f) for f in feats):
            raise InstanceError(f"instance {self.id!r}: non-finite feature value")
        object.__setattr__(self, "features", feats)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.features, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.features)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.id == other.id and self.features == other.features

    def __hash__(self) -> int:
        return hash((self.id, self.features))


@dataclass(frozen=True)
class FeatureScaler:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self) -> None:
        mins = tuple(float(v) for v in self.mins)
        maxs = tuple(float(v) for v in self.maxs)
        if len(mins) != len(maxs):
            raise ValueError("scaler mins/maxs length mismatch")
        if any(hi < lo for lo, hi in zip(mins, maxs)):
            raise ValueError("scaler requires max >= min in every dimension")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def dim(self) -> int:
        return len(self.mins)

    def transform(self, features: Sequence[float] | np.ndarray) -> np.ndarray:
        """Min-max normalize; constant dimensions map to 0. Values may leave [0, 1]."""
        x = np.asarray(features, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"feature dimension {x.shape[-1]} does not match scaler ({self.dim})")
        lo = np.asarray(self.mins)
        span = np.asarray(self.maxs) - lo
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (x - lo) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureScaler":
        return cls(tuple(d["mins"]), tuple(d["maxs"]))

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        x = np.atleast_2d(np.asarray(features, dtype=float))
        return cls(tuple(x.min(axis=0)), tuple(x.max(axis=0)))


@dataclass(frozen=True)
class InstanceSet:
    instances: tuple[Instance, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        insts = tuple(self.instances)
        object.__setattr__(self, "instances", insts)
        index: dict[str, int] = {}
        dims = {inst.dim for inst in insts}
        for i, inst in enumerate(insts):
            if inst.id in index:
                raise InstanceError(f"duplicate instance id {inst.id!r}")
            index[inst.id] = i
        if len(dims) > 1:
            expected = insts[0].dim
            bad = next(inst for inst in insts if inst.dim != expected)
            raise InstanceError(f"instance {bad.id!r}: feature dimension {bad.dim}, expected {expected}")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __getitem__(self, key: str | int) -> Instance:
        if isinstance(key, int):
            return self.instances[key]
        try:
            return self.instances[self._index[key]]
        except KeyError:
            raise KeyError(f"unknown instance id {key!r}") from None

    def __contains__(self, key: object) -> bool:
        return key in self._index

    @property
    def ids(self) -> list[str]:
        return [inst.id for inst in self.instances]

    @property
    def dim(self) -> int:
        return self.instances[0].dim if self.instances else 0

    @property
    def features(self) -> np.ndarray:
        return np.array([inst.features for inst in self.instances], dtype=float).reshape(len(self), self.dim)

    @property
    def feature_stats(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        x = self.features
        return tuple(x.min(axis=0)), tuple(x.max(axis=0))

    def scaler(self) -> FeatureScaler:
        if not self.instances:
            raise InstanceError("cannot fit a scaler on an empty instance set")
        return FeatureScaler(*self.feature_stats)

    def position(self, instance_id: str) -> int:
        return self._index[instance_id]

    def subset(self, ids: Iterable[str]) -> "InstanceSet":
        return InstanceSet(tuple(self[i] for i in ids))

    def with_instance(self, inst: Instance) -> "InstanceSet":
        return InstanceSet(self.instances + (inst,))


def dist(a: Instance, b: Instance, scaler: FeatureScaler) -> float:
    if a.dim != b.dim or a.dim != scaler.dim:
        raise ValueError(f"dimension mismatch: {a.dim}, {b.dim}, scaler {scaler.dim}")
    return float(np.linalg.norm(scaler.transform(a.features) - scaler.transform(b.features)))


def pairwise_dist(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of already-normalized matrices."""
    diff = xa[:, None, :] - xb[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def medoid(iset: InstanceSet, members: Sequence[str], scaler: FeatureScaler) -> Instance:
    """Member with minimal summed distance to the others; ties go to the smallest id."""
    if not members:
        raise ValueError("medoid of an empty member list")
    insts = [iset[m] for m in members]
    x = scaler.transform(np.array([i.features for i in insts], dtype=float).reshape(len(insts), -1))
    totals = pairwise_dist(x, x).sum(axis=1)
    best = min(range(len(insts)), key=lambda j: (totals[j], insts[j].id))
    return insts[best]


def load_instance_set(manifest: str | os.PathLike,
                      records: Mapping[str, Mapping[str, Any]] | None = None) -> InstanceSet:
    """Read a ``id,path,f1,...,fd`` CSV manifest.

    Rows with an empty ``path`` are synthetic: their inline record comes from
    ``records[id]``, and if the feature cells are blank the features are taken
    from the record's ``features`` entry.
    """
    records = records or {}
    if not os.path.exists(manifest):
        raise InstanceError(f"manifest not found: {manifest}")
    base = os.path.dirname(os.path.abspath(manifest))
    with open(manifest, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InstanceError(f"empty manifest: {manifest}") from None
        if header[:2] != ["id", "path"]:
            raise InstanceError(f"manifest header must start with id,path (got {header[:2]})")
        n_feat = len(header) - 2
        out: list[Instance] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            iid = row[0].strip()
            if not iid:
                raise InstanceError(f"line {lineno}: empty instance id")
            if iid in seen:
                raise InstanceError(f"duplicate instance id {iid!r}")
            seen.add(iid)
            if len(row) != n_feat + 2:
                raise InstanceError(f"instance {iid!r}: {len(row) - 2} feature columns, expected {n_feat}")
            path = row[1].strip()
            cells = [c.strip() for c in row[2:]]
            payload: Any
            if path:
                payload = path if os.path.isabs(path) else os.path.normpath(os.path.join(base, path))
            else:
                payload = dict(records.get(iid, {}))
            if cells and all(c == "" for c in cells) and isinstance(payload, dict) and "features" in payload:
                feats = payload["features"]
                if len(feats) != n_feat:
                    raise InstanceError(f"instance {iid!r}: record has {len(feats)} features, expected {n_feat}")
            else:
                try:
                    feats = [float(c) for c in cells]
                except ValueError:
                    raise InstanceError(f"instance {iid!r}: non-numeric feature value") from None
            out.append(Instance(iid, tuple(feats), payload))
    if not out:
        raise InstanceError(f"manifest has no instances: {manifest}")
    return InstanceSet(tuple(out))


def write_manifest(path: str | os.PathLike, instances: Iterable[Instance],
                   paths: Mapping[str, str] | None = None) -> None:
    insts = list(instances)
    d = insts[0].dim if insts else 0
    paths = paths or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "path", *[f"f{j + 1}" for j in range(d)]])
        for inst in insts:
            w.writerow([inst.id, paths.get(inst.id, ""), *[repr(v) for v in inst.features]])
