"""
Sampling the performance function: target runs, penalties and the archive.

External targets are spawned as subprocesses and must print a line::

    ACPF_RESULT status=<ok|timeout|crashed> perf=<float>

Synthetic targets are closed-form functions of the instance features and the
configuration, used as oracle fixtures.
"""
from __future__ import annotations

import json
import math
import os
import re
import shlex
import subprocess
import time
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .config_space import Configuration, ConfigurationSpace
from .instances import Instance

RESULT_RE = re.compile(r"^ACPF_RESULT status=(ok|timeout|crashed) perf=(\S+)\s*$")
KILL_GRACE_SECONDS = 0.5
STATUSES = ("ok", "timeout", "crashed")


class TargetSpawnError(RuntimeError):
    """The target command could not be started at all."""


@dataclass(frozen=True)
class TargetSpec:
    kind: str  # "external" | "synthetic"
    command: str = ""
    synthetic_name: str = ""
    synthetic_params: Mapping[str, Any] = field(default_factory=dict)
    sense: str = "maximize"
    cutoff_seconds: float = 60.0
    penalized_value: float = -1.0

    def __post_init__(self) -> None:
        if self.kind not in ("external", "synthetic"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"unknown objective sense {self.sense!r}")
        if not self.cutoff_seconds > 0:
            raise ValueError("cutoff_seconds must be positive")
        if self.kind == "external" and not self.command.strip():
            raise ValueError("external target needs a command template")
        if self.kind == "synthetic" and self.synthetic_name not in SYNTHETIC_TARGETS:
            raise ValueError(f"unknown synthetic target {self.synthetic_name!r}")

    def orient(self, performance: float) -> float:
        """Map a raw performance to a larger-is-better score."""
        return performance if self.sense == "maximize" else -performance

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sense": self.sense, "cutoff_seconds": self.cutoff_seconds,
             "penalized_value": self.penalized_value}
        if self.kind == "external":
            d["command"] = self.command
        else:
            d["name"] = self.synthetic_name
            d["params"] = dict(self.synthetic_params)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TargetSpec":
        kind = d.get("kind", "synthetic")
        return cls(kind=kind, command=d.get("command", ""),
                   synthetic_name=d.get("name", ""),
                   synthetic_params=dict(d.get("params", {})),
                   sense=d.get("sense", "maximize"),
                   cutoff_seconds=float(d.get("cutoff_seconds", 60.0)),
                   penalized_value=float(d.get("penalized_value", -1.0)))


# -- synthetic targets --------------------------------------------------------------

def quadratic_valley(features: Sequence[float], cfg: Mapping[str, Any],
                     params: Mapping[str, Any] | None = None) -> float:
    f = float(features[0])
    best_m = "a" if f < 0.5 else "b"
    return 1.0 - (cfg["x"] - f) ** 2 - 0.25 * (cfg["m"] != best_m)


def cliff(features: Sequence[float], cfg: Mapping[str, Any],
          params: Mapping[str, Any] | None = None) -> float:
    f = float(features[0])
    hit = (cfg["m"] == "a" and f < 0.5) or (cfg["m"] == "b" and f >= 0.5)
    return 1.0 if hit else 0.0


SYNTHETIC_TARGETS: dict[str, Callable[..., float]] = {
    "quadratic_valley": quadratic_valley,
    "cliff": cliff,
}


def synthetic_target(name: str, params: Mapping[str, Any] | None = None) -> TargetSpec:
    if name not in SYNTHETIC_TARGETS:
        raise ValueError(f"unknown synthetic target {name!r}")
    params = dict(params or {})
    return TargetSpec(kind="synthetic", synthetic_name=name, synthetic_params=params,
                      sense="maximize", cutoff_seconds=float(params.get("cutoff_seconds", 60.0)),
                      penalized_value=float(params.get("penalized_value", -1.0)))


# -- records and archive ------------------------------------------------------------

@dataclass(frozen=True)
class EvalRecord:
    instance_id: str
    configuration: Configuration
    seed: int
    performance: float
    status: str = "ok"
    wall_seconds: float = 0.0

    def to_dict(self, space: ConfigurationSpace) -> dict:
        return {"instance_id": self.instance_id,
                "configuration": space.config_to_json(self.configuration),
                "seed": self.seed, "performance": self.performance,
                "status": self.status, "wall_seconds": self.wall_seconds}

    @classmethod
    def from_dict(cls, d: Mapping, space: ConfigurationSpace) -> "EvalRecord":
        return cls(instance_id=str(d["instance_id"]),
                   configuration=space.make(d["configuration"]),
                   seed=int(d["seed"]), performance=float(d["performance"]),
                   status=d.get("status", "ok"), wall_seconds=float(d.get("wall_seconds", 0.0)))


class EvalArchive:
    """Append-only store of evaluation records keyed by (instance, configuration, seed).

    Besides the raw records it keeps per-(instance, configuration) running sums of
    the oriented score (larger is better), averaged over seeds.
    """

    def __init__(self, space: ConfigurationSpace, sense: str = "maximize") -> None:
        self.space = space
        self.sense = sense
        self.records: list[EvalRecord] = []
        self._index: dict[tuple, int] = {}
        self._sums: dict[str, dict[tuple, list]] = {}

    def key(self, instance_id: str, cfg: Mapping[str, Any], seed: int) -> tuple:
        return (instance_id, self.space.key(cfg), int(seed))

    def insert(self, record: EvalRecord) -> bool:
        """Append ``record``; returns False (and leaves the archive unchanged) on a duplicate key."""
        ckey = self.space.key(record.configuration)
        key = (record.instance_id, ckey, int(record.seed))
        if key in self._index:
            return False
        self._index[key] = len(self.records)
        self.records.append(record)
        score = record.performance if self.sense == "maximize" else -record.performance
        row = self._sums.setdefault(record.instance_id, {})
        entry = row.get(ckey)
        if entry is None:
            row[ckey] = [record.configuration, score, 1]
        else:
            entry[1] += score
            entry[2] += 1
        return True

    def contains(self, instance_id: str, cfg: Mapping[str, Any], seed: int) -> bool:
        return self.key(instance_id, cfg, seed) in self._index

    def __contains__(self, key: tuple) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EvalRecord]:
        return iter(self.records)

    def keys(self) -> list[tuple]:
        return list(self._index)

    def instance_ids(self) -> list[str]:
        return list(self._sums)

    def scores(self, instance_id: str) -> dict[tuple, tuple[Configuration, float]]:
        """Configuration key -> (configuration, mean oriented score) for one instance."""
        row = self._sums.get(instance_id, {})
        return {k: (v[0], v[1] / v[2]) for k, v in row.items()}

    def score(self, instance_id: str, cfg: Mapping[str, Any]) -> float | None:
        entry = self._sums.get(instance_id, {}).get(self.space.key(cfg))
        return None if entry is None else entry[1] / entry[2]

    def covering(self, instance_ids: Sequence[str]) -> list[Configuration]:
        """Configurations evaluated on every one of ``instance_ids``, in key order."""
        if not instance_ids:
            return []
        common = None
        for iid in instance_ids:
            ks = set(self._sums.get(iid, {}))
            common = ks if common is None else common & ks
            if not common:
                return []
        first = self._sums[instance_ids[0]]
        return [first[k][0] for k in sorted(common)]

    def copy(self) -> "EvalArchive":
        new = EvalArchive(self.space, self.sense)
        for r in self.records:
            new.insert(r)
        return new

    def dumps(self) -> str:
        return "".join(json.dumps(r.to_dict(self.space), sort_keys=True) + "\n" for r in self.records)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path: str | os.PathLike, space: ConfigurationSpace,
             sense: str = "maximize") -> "EvalArchive":
        archive = cls(space, sense)
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    archive.insert(EvalRecord.from_dict(json.loads(line), space))
        return archive


# -- evaluation -----------------------------------------------------------------------

def evaluate(target: TargetSpec, instance: Instance, cfg: Mapping[str, Any], seed: int,
             space: ConfigurationSpace | None = None) -> EvalRecord:
    """Run the target once on ``(instance, cfg, seed)``.

    ``space`` is required for external targets (only active parameters are
    passed on the command line).
    """
    cfg = Configuration(cfg)
    if target.kind == "synthetic":
        start = time.monotonic()
        try:
            perf = float(SYNTHETIC_TARGETS[target.synthetic_name](
                instance.features, cfg, target.synthetic_params))
            status = "ok" if math.isfinite(perf) else "crashed"
        except Exception:
            status = "crashed"
        if status != "ok":
            perf = target.penalized_value
        return EvalRecord(instance.id, cfg, int(seed), perf, status, time.monotonic() - start)
    if space is None:
        raise ValueError("external targets need the configuration space")
    return _run_external(target, instance, cfg, int(seed), space)


def build_command(target: TargetSpec, instance: Instance, cfg: Mapping[str, Any],
                  seed: int, space: ConfigurationSpace) -> list[str]:
    payload = instance.payload if isinstance(instance.payload, str) else ""
    subs = {"{instance}": payload, "{seed}": str(seed), "{cutoff}": repr(float(target.cutoff_seconds))}
    argv = []
    for tok in shlex.split(target.command):
        for k, v in subs.items():
            tok = tok.replace(k, v)
        argv.append(tok)
    for name in space.active_names(cfg):
        argv.append(f"--{name}={_render(cfg[name])}")
    return argv


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_result(stdout: str) -> tuple[str, float] | None:
    """Last ``ACPF_RESULT`` line on stdout, or None."""
    found = None
    for line in stdout.splitlines():
        m = RESULT_RE.match(line.strip())
        if m:
            try:
                found = (m.group(1), float(m.group(2)))
            except ValueError:
                found = ("crashed", math.nan)
    return found


def _run_external(target: TargetSpec, instance: Instance, cfg: Configuration, seed: int,
                  space: ConfigurationSpace) -> EvalRecord:
    argv = build_command(target, instance, cfg, seed, space)
    start = time.monotonic()
    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                                stdin=subprocess.DEVNULL, text=True)
    except OSError as exc:
        raise TargetSpawnError(f"cannot start target {argv[0]!r}: {exc}") from exc
    timed_out = False
    try:
        out, _ = proc.communicate(timeout=target.cutoff_seconds)
    except subprocess.TimeoutExpired:
        timed_out = True
        proc.terminate()
        try:
            out, _ = proc.communicate(timeout=KILL_GRACE_SECONDS)
        except subprocess.TimeoutExpired:
            proc.kill()
            out, _ = proc.communicate()
    wall = time.monotonic() - start
    if timed_out:
        return EvalRecord(instance.id, cfg, seed, target.penalized_value, "timeout", wall)
    parsed = parse_result(out or "")
    if parsed is None:
        return EvalRecord(instance.id, cfg, seed, target.penalized_value, "crashed", wall)
    status, perf = parsed
    if status != "ok" or not math.isfinite(perf):
        return EvalRecord(instance.id, cfg, seed, target.penalized_value,
                          status if status != "ok" else "crashed", wall)
    return EvalRecord(instance.id, cfg, seed, perf, "ok", wall)


def evaluate_batch(target: TargetSpec,
                   points: Iterable[tuple[Instance, Mapping[str, Any], int]],
                   parallelism: int = 1,
                   space: ConfigurationSpace | None = None) -> list[EvalRecord]:
    """Evaluate all points; output order follows input order."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    points = list(points)
    # synthetic targets are cheap pure functions; threads only add overhead
    if parallelism == 1 or len(points) <= 1 or target.kind == "synthetic":
        return [evaluate(target, inst, cfg, seed, space) for inst, cfg, seed in points]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda p: evaluate(target, p[0], p[1], p[2], space), points))
