"""
The knowledge-encoding process (sample -> evaluate -> update under a budget),
meta-sampling, and online configuration over an instance stream.

A scenario (see :mod:`acpf.scenario`) supplies the space, target, training
instances, scaler, candidate pool and model settings; this module only reads
those attributes.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

from ._rng import child_seed, rng_for
from .config_space import (TOO_LARGE, Configuration, ConfigurationSpace, enumerate_space, grid,
                           neighbors, sample_uniform)
from .evaluation import EvalArchive, EvalRecord, evaluate, evaluate_batch
from .instances import FeatureScaler, Instance, InstanceSet, medoid
from .models import (CompositeModel, Model, PartitionModel, SurrogateModel, _make_cluster,
                     aggregate, aggregate_values, fit_mapping, fit_partition, fit_surrogate, model_to_dict)
from .recommend import CandidatePool, cluster_of, recommend
from .search import (BudgetExhausted, Objective, argmax_enumerated, evolutionary_search,
                     local_search)

if TYPE_CHECKING:
    from .scenario import Scenario

SAMPLE_RETRIES = 100
DEFAULT_GRID_STEPS = 11
STRATEGIES = ("uniform", "epsilon_greedy", "search_driven")
ONLINE_VARIANTS = ("reactive", "surrogate_online")


class BudgetExhaustedError(RuntimeError):
    pass


@dataclass
class Budget:
    max_evaluations: int | None = None
    max_iterations: int | None = None
    max_wall_seconds: float | None = None
    evaluations: int = 0
    iterations: int = 0
    _started: float | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        limits = (self.max_evaluations, self.max_iterations, self.max_wall_seconds)
        if all(v is None for v in limits):
            raise ValueError("budget needs at least one limit")
        for v in limits:
            if v is not None and not v > 0:
                raise ValueError("budget limits must be positive")

    def fresh(self) -> "Budget":
        return Budget(self.max_evaluations, self.max_iterations, self.max_wall_seconds)

    def start(self) -> None:
        if self._started is None:
            self._started = time.monotonic()

    @property
    def wall_seconds(self) -> float:
        return 0.0 if self._started is None else time.monotonic() - self._started

    @property
    def remaining_evaluations(self) -> float:
        if self.max_evaluations is None:
            return math.inf
        return self.max_evaluations - self.evaluations

    def exhausted(self) -> bool:
        return (self.remaining_evaluations <= 0
                or (self.max_iterations is not None and self.iterations >= self.max_iterations)
                or (self.max_wall_seconds is not None and self.wall_seconds >= self.max_wall_seconds))

    def snapshot(self) -> dict:
        # wall time is left out so run logs stay reproducible
        return {"evaluations": self.evaluations, "iterations": self.iterations}

    def to_dict(self) -> dict:
        return {k: v for k, v in (("max_evaluations", self.max_evaluations),
                                  ("max_iterations", self.max_iterations),
                                  ("max_wall_seconds", self.max_wall_seconds)) if v is not None}


@dataclass(frozen=True)
class SamplingStrategy:
    name: str = "uniform"
    epsilon: float = 0.3
    batch_size: int = 8

    def __post_init__(self) -> None:
        if self.name not in STRATEGIES:
            raise ValueError(f"unknown sampling strategy {self.name!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class ModelKind:
    kind: str
    C: int | None = None
    helper: str | None = None

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        text = text.strip()
        if text in ("mapping", "surrogate", "aggregate"):
            return cls(text)
        if text.startswith("partition:"):
            try:
                C = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad cluster count in {text!r}") from None
            if C < 1:
                raise ValueError("cluster count must be >= 1")
            return cls("partition", C=C)
        if text in ("composite", "composite:perproblem+surrogate"):
            return cls("composite", C=1, helper="surrogate")
        if text == "composite:perproblem+aggregate":
            return cls("composite", C=1, helper="aggregate")
        raise ValueError(f"unknown model kind {text!r}")

    def __str__(self) -> str:
        if self.kind == "partition":
            return f"partition:{self.C}"
        if self.kind == "composite":
            return f"composite:perproblem+{self.helper}"
        return self.kind


@dataclass(frozen=True)
class SampleBatch:
    points: tuple[tuple[str, Configuration, int], ...] = ()

    def __len__(self) -> int:
        return len(self.points)


class RunLog:
    """NDJSON event stream: iteration, phase, payload digest and budget snapshot."""

    def __init__(self) -> None:
        self.events: list[dict] = []

    def emit(self, iteration: int, phase: str, payload: Any, budget: Budget) -> None:
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        self.events.append({"iteration": iteration, "phase": phase,
                            "digest": hashlib.sha256(blob).hexdigest()[:16],
                            "budget": budget.snapshot()})

    def dumps(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


@dataclass
class KepState:
    archive: EvalArchive | None = None
    instances: InstanceSet | None = None        # working set (grows only via meta-sampling)
    training_ids: list[str] = field(default_factory=list)
    budget: Budget | None = None
    strategy: SamplingStrategy = field(default_factory=SamplingStrategy)
    model_kind: ModelKind | None = None
    seed: int = 0
    t: int = 0
    model: Model | None = None
    initial_model: Model | None = None         # carried over from an online run
    cursor: int = 0
    log: RunLog = field(default_factory=RunLog)


# -- helpers ------------------------------------------------------------------------

def default_candidates(space: ConfigurationSpace, pool: CandidatePool | None) -> list[Configuration]:
    """Explicit/grid pool candidates, else the enumerated space, else an 11-step grid."""
    if pool is not None and not pool.is_search:
        return pool.candidates()
    full = enumerate_space(space, 10**5)
    if full is not TOO_LARGE:
        return full
    cands = grid(space, DEFAULT_GRID_STEPS, limit=10**5)
    if cands is TOO_LARGE:
        raise ValueError("no finite candidate pool available; declare one in the scenario")
    return cands


def _best_known(archive: EvalArchive, instance_id: str | None) -> Configuration | None:
    space = archive.space
    if instance_id is not None:
        scores = archive.scores(instance_id)
        if scores:
            return argmax_enumerated(sorted(scores.values(), key=lambda cs: space.key(cs[0])), space)
    best = None
    for iid in archive.instance_ids():
        for cfg, s in archive.scores(iid).values():
            if best is None or s > best[1] or (s == best[1] and space.key(cfg) < space.key(best[0])):
                best = (cfg, s)
    return None if best is None else best[0]


def _working_with_records(state: KepState) -> InstanceSet:
    have = set(state.archive.instance_ids())
    return InstanceSet(tuple(i for i in state.instances if i.id in have))


def _training_set(state: KepState) -> InstanceSet:
    return state.instances.subset(state.training_ids)


# -- phases -------------------------------------------------------------------------

def sample_t(state: KepState, scenario: "Scenario", strategy: SamplingStrategy | None = None,
             batch_size: int | None = None, cover_all: bool = False) -> SampleBatch:
    """Pick previously unsampled (instance, configuration, seed) points.

    ``cover_all`` makes each chosen configuration cover every training instance
    (``batch_size`` then counts configurations).
    """
    strategy = strategy or state.strategy
    batch_size = batch_size or strategy.batch_size
    archive, space = state.archive, scenario.space
    eval_seed = scenario.eval_seed
    rng = rng_for(state.seed, 10, state.t)
    insts = list(_training_set(state)) if cover_all else list(state.instances)
    if not insts:
        return SampleBatch()
    remaining = state.budget.remaining_evaluations
    chosen: list[tuple[str, Configuration, int]] = []
    keys: set[tuple] = set()
    draws = 0
    retries = 0

    def uniform_cfg() -> Configuration:
        nonlocal draws
        draws += 1
        return sample_uniform(space, child_seed(state.seed, 11, state.t, draws), 1)[0]

    def propose(inst_id: str | None) -> Configuration:
        if strategy.name == "epsilon_greedy" and rng.random() >= strategy.epsilon:
            center = _best_known(archive, inst_id)
            if center is None and state.initial_model is not None:
                center = _recommend_initial(state, scenario, inst_id)
            if center is not None:
                moves = neighbors(space, center, child_seed(state.seed, 12, state.t, len(chosen), retries), 1)
                if moves:
                    return moves[0]
        return uniform_cfg()

    if cover_all:
        n_cfg = int(min(batch_size, remaining // len(insts))) if remaining != math.inf else batch_size
        picked = 0
        while picked < n_cfg and retries <= SAMPLE_RETRIES:
            cfg = propose(None) if retries == 0 else uniform_cfg()
            block = [(i.id, cfg, eval_seed) for i in insts
                     if not archive.contains(i.id, cfg, eval_seed)
                     and (i.id, space.key(cfg), eval_seed) not in keys]
            if len(block) < len(insts):
                retries += 1
                continue
            retries = 0
            for p in block:
                keys.add((p[0], space.key(p[1]), p[2]))
            chosen.extend(block)
            picked += 1
        return SampleBatch(tuple(chosen))

    limit = int(min(batch_size, remaining))
    fresh = True
    while len(chosen) < limit and retries <= SAMPLE_RETRIES:
        inst = insts[state.cursor % len(insts)]
        cfg = propose(inst.id) if fresh else uniform_cfg()
        key = (inst.id, space.key(cfg), eval_seed)
        if key in keys or archive.contains(inst.id, cfg, eval_seed):
            retries += 1
            fresh = False
            continue
        keys.add(key)
        chosen.append((inst.id, cfg, eval_seed))
        state.cursor += 1
        fresh = True
    return SampleBatch(tuple(chosen))


def _recommend_initial(state: KepState, scenario: "Scenario", inst_id: str | None) -> Configuration:
    inst = state.instances[inst_id] if inst_id is not None else state.instances[0]
    rec = recommend(state.initial_model, inst, pool=default_candidates(scenario.space, scenario.pool),
                    scaler=scenario.scaler)
    return rec.configuration


def evaluate_t(state: KepState, scenario: "Scenario", batch: SampleBatch) -> list[EvalRecord]:
    points = [(state.instances[iid], cfg, seed) for iid, cfg, seed in batch.points]
    records = evaluate_batch(scenario.target, points, scenario.parallelism, scenario.space)
    for rec in records:
        if not state.archive.insert(rec):
            raise AssertionError(f"sampled point already archived: {rec.instance_id}")
    state.budget.evaluations += len(records)
    return records


def update_t(state: KepState, scenario: "Scenario", kind: ModelKind) -> Model | None:
    """Refit the model from the archive."""
    archive = state.archive
    if kind.kind == "mapping":
        have = _working_with_records(state)
        if not len(have):
            return state.model
        model = fit_mapping(archive, have, scenario.mapping_k, scenario.scaler)
    elif kind.kind == "surrogate":
        have = _working_with_records(state)
        if not len(have):
            return state.model
        model = fit_surrogate(archive, have, scenario.surrogate_k, scenario.scaler)
    elif kind.kind == "aggregate":
        training = _training_set(state)
        covered = archive.covering(training.ids)
        if not covered:
            return state.model
        model = aggregate(archive, covered, training, scenario.aggregation)
    elif kind.kind == "composite":
        model = _fit_composite(state, scenario, kind)
        if model is None:
            return state.model
    else:
        raise ValueError(f"update_t does not refit {kind}")
    model.metadata.update({"sampler": state.strategy.name, "model_kind": str(kind)})
    return model


def _fit_composite(state: KepState, scenario: "Scenario", kind: ModelKind) -> CompositeModel | None:
    training = _training_set(state)
    archive = state.archive
    if kind.helper == "surrogate":
        have = _working_with_records(state)
        if not len(have):
            return None
        helper = fit_surrogate(archive, have, scenario.surrogate_k, scenario.scaler)
        if scenario.pool is not None and scenario.pool.is_search:
            def chi(cfg):
                return aggregate(helper, [cfg], training, scenario.aggregation).scores[0]
            res = local_search(Objective(chi, scenario.pool.search_budget), scenario.space,
                               scenario.space.default(), child_seed(state.seed, 30, state.t))
            cfg, score = res.best, res.best_score
        else:
            agg = aggregate(helper, default_candidates(scenario.space, scenario.pool),
                            training, scenario.aggregation)
            cfg, score = agg.best()
    else:
        covered = archive.covering(training.ids)
        if not covered:
            return None
        helper = aggregate(archive, covered, training, scenario.aggregation)
        cfg, score = helper.best()
    cluster = _make_cluster(training, training.ids, scenario.scaler, cfg, score)
    part = PartitionModel(scenario.space, [cluster], scenario.scaler, archive.sense)
    return CompositeModel(part, helper)


# -- the loop -----------------------------------------------------------------------

def new_state(scenario: "Scenario", strategy: SamplingStrategy, kind: ModelKind, budget: Budget,
              seed: int, initial: KepState | None = None) -> KepState:
    state = initial if initial is not None else KepState()
    if state.archive is None:
        state.archive = EvalArchive(scenario.space, scenario.target.sense)
    training = scenario.instances
    if state.instances is None:
        state.instances = training
    else:
        extra = [i for i in state.instances if i.id not in training]
        state.instances = InstanceSet(tuple(training) + tuple(extra))
    state.training_ids = list(training.ids)
    state.budget = budget
    state.strategy = strategy
    state.model_kind = kind
    state.seed = int(seed)
    return state


def run_kep(scenario: "Scenario", strategy: SamplingStrategy | str | None = None,
            model_kind: ModelKind | str = "mapping", budget: Budget | None = None,
            seed: int = 0, initial_state: KepState | None = None) -> tuple[Model, KepState]:
    """Iterate sample/evaluate/update until a budget dimension runs out.

    Returns the final model and the sealed state (archive, run log, counters).
    """
    kind = ModelKind.parse(model_kind) if isinstance(model_kind, str) else model_kind
    if isinstance(strategy, str):
        strategy = replace(scenario.strategy, name=strategy)
    strategy = strategy or _default_strategy(scenario, kind)
    budget = (budget or scenario.budget).fresh()
    if kind.kind == "partition" and kind.C > len(scenario.instances):
        raise ValueError(f"partition:{kind.C} needs at least {kind.C} training instances")
    state = new_state(scenario, strategy, kind, budget, seed, initial_state)
    budget.start()
    if kind.kind == "partition":
        _run_partition(state, scenario, kind)
    else:
        cover_all = kind.kind == "aggregate" or (kind.kind == "composite" and kind.helper == "aggregate")
        if cover_all and budget.remaining_evaluations < len(state.training_ids):
            raise ValueError("evaluation budget smaller than the training set; "
                             "aggregate models need full coverage")
        while not budget.exhausted():
            batch = sample_t(state, scenario, strategy, strategy.batch_size, cover_all)
            state.log.emit(state.t, "sample", [[i, scenario.space.digest(c), s] for i, c, s in batch.points],
                           budget)
            if not batch.points:
                break
            records = evaluate_t(state, scenario, batch)
            state.log.emit(state.t, "evaluate", [[r.instance_id, r.performance, r.status] for r in records],
                           budget)
            state.model = update_t(state, scenario, kind)
            state.log.emit(state.t, "update", _model_digest_payload(state.model), budget)
            state.t += 1
            budget.iterations += 1
    if state.model is None:
        raise RuntimeError("budget exhausted before any model could be fitted")
    state.model.metadata.update({"model_kind": str(kind), "sampler": strategy.name,
                                 "scenario_hash": scenario.hash})
    return state.model, state


def _default_strategy(scenario: "Scenario", kind: ModelKind) -> SamplingStrategy:
    base = scenario.strategy
    if kind.kind == "partition":
        return replace(base, name="search_driven")
    if base.name == "search_driven":
        return replace(base, name="uniform")
    return base


def _model_digest_payload(model: Model | None) -> Any:
    return None if model is None else model_to_dict(model)


def _run_partition(state: KepState, scenario: "Scenario", kind: ModelKind) -> None:
    """Search-driven sampling: each objective call of the per-cluster search is one iteration."""
    budget, archive, space = state.budget, state.archive, scenario.space
    training = _training_set(state)
    eval_seed = scenario.eval_seed
    C = kind.C
    progress = {"cluster": 0, "spent": 0, "share": math.inf}

    def make_fn(members: Sequence[Instance], cluster_idx: int):
        def fn(cfg: Configuration) -> float:
            pending = [(m, cfg, eval_seed) for m in members if not archive.contains(m.id, cfg, eval_seed)]
            if pending:
                room = min(budget.remaining_evaluations, progress["share"] - progress["spent"])
                it_left = (budget.max_iterations is None or budget.iterations < budget.max_iterations)
                wall_left = (budget.max_wall_seconds is None or budget.wall_seconds < budget.max_wall_seconds)
                if len(pending) > room or not it_left or not wall_left:
                    raise BudgetExhausted
                state.log.emit(state.t, "sample", [[m.id, space.digest(c), s] for m, c, s in pending], budget)
                records = evaluate_t(state, scenario,
                                     SampleBatch(tuple((m.id, c, s) for m, c, s in pending)))
                progress["spent"] += len(records)
                state.log.emit(state.t, "evaluate", [[r.instance_id, r.performance, r.status] for r in records],
                               budget)
            vals = [archive.score(m.id, cfg) for m in members]
            score = aggregate_values(vals, scenario.aggregation)
            if pending:
                state.log.emit(state.t, "update", [cluster_idx, space.digest(cfg), score], budget)
                state.t += 1
                budget.iterations += 1
            return score
        return fn

    def tuner(members: Sequence[Instance], seed: int):
        i = progress["cluster"]
        progress["cluster"] += 1
        progress["spent"] = 0
        progress["share"] = budget.remaining_evaluations / (C - i)
        obj = Objective(make_fn(members, i), 10**9)
        start = space.default()
        if state.initial_model is not None:
            rep = medoid(training, [m.id for m in members], scenario.scaler)
            start = recommend(state.initial_model, rep, pool=default_candidates(space, scenario.pool),
                              scaler=scenario.scaler).configuration
        if scenario.tuner == "evolutionary":
            return evolutionary_search(obj, space, seed, scenario.population_size)
        return local_search(obj, space, start, seed)

    model = fit_partition(training, scenario.scaler, C, tuner, state.seed,
                          space=space, sense=archive.sense)
    model.metadata.update({"tuner": scenario.tuner})
    state.model = model
    state.log.emit(state.t, "update", _model_digest_payload(model), budget)


# -- meta-sampling ------------------------------------------------------------------

def meta_sampling_step(scenario: "Scenario", state: KepState, new_instance: Instance) -> KepState:
    """Recommend for a new instance, evaluate it, add it to the working set and refit."""
    if state.model is None:
        raise ValueError("meta-sampling needs a fitted model")
    if state.budget.remaining_evaluations < 1:
        raise BudgetExhaustedError("no evaluation budget left for meta-sampling")
    pool = default_candidates(scenario.space, scenario.pool) if _needs_pool(state.model) else None
    rec = recommend(state.model, new_instance, pool=pool, scaler=scenario.scaler)
    record = evaluate(scenario.target, new_instance, rec.configuration, scenario.eval_seed, scenario.space)
    if new_instance.id not in state.instances:
        state.instances = state.instances.with_instance(new_instance)
    state.archive.insert(record)
    state.budget.evaluations += 1
    state.log.emit(state.t, "meta", [new_instance.id, scenario.space.digest(rec.configuration),
                                     record.performance], state.budget)
    kind = state.model_kind or ModelKind(state.model.kind)
    if isinstance(state.model, (PartitionModel, CompositeModel)):
        state.model = _absorb(state.model, state.instances, new_instance, scenario.scaler)
    else:
        state.model = update_t(state, scenario, kind)
    state.t += 1
    state.budget.iterations += 1
    return state


def _needs_pool(model: Model) -> bool:
    return isinstance(model, SurrogateModel)


def _absorb(model, iset: InstanceSet, inst: Instance, scaler: FeatureScaler):
    """Add an instance to the cluster it is routed to; configurations stay fixed."""
    if isinstance(model, CompositeModel):
        return CompositeModel(_absorb(model.partition, iset, inst, scaler), model.helper, model.metadata)
    if inst.id in model.member_ids:
        return model
    h = 0 if model.C == 1 else cluster_of(model, inst.features, scaler)
    clusters = list(model.clusters)
    old = clusters[h]
    members = old.member_ids + [inst.id]
    clusters[h] = _make_cluster(iset, members, scaler, old.configuration, old.score)
    return PartitionModel(model.space, clusters, model.scaler, model.sense, dict(model.metadata))


# -- online -------------------------------------------------------------------------

@dataclass(frozen=True)
class OnlineStep:
    arrival: int
    instance_id: str
    configuration: Configuration
    digest: str
    performance: float
    explored: bool


@dataclass
class OnlineResult:
    model: Model | None
    trace: list[OnlineStep]
    archive: EvalArchive
    instances: InstanceSet
    variant: str
    sealed: bool = True


def run_online(scenario: "Scenario", stream: Sequence[Instance], variant: str,
               budget: Budget | None = None, seed: int = 0,
               exploration_rate: float | None = None) -> OnlineResult:
    """Recommend, evaluate and update on each arriving instance.

    The recommendation for arrival n only uses arrivals before n. The first
    arrival always gets the all-defaults configuration.
    """
    if variant not in ONLINE_VARIANTS:
        raise ValueError(f"unknown online variant {variant!r}")
    stream = list(stream)
    if not stream:
        raise ValueError("empty instance stream")
    space, target = scenario.space, scenario.target
    rate = scenario.exploration_rate if exploration_rate is None else exploration_rate
    budget = (budget or scenario.budget).fresh()
    budget.start()
    archive = EvalArchive(space, target.sense)
    cands = default_candidates(space, scenario.pool)
    running: dict[tuple, list] = {}
    seen: list[Instance] = []
    trace: list[OnlineStep] = []
    for n, inst in enumerate(stream):
        if budget.exhausted():
            break
        cfg, explored = _online_choice(n, inst, variant, rate, seed, space, cands, running,
                                       archive, seen, scenario)
        record = evaluate(target, inst, cfg, scenario.eval_seed, space)
        archive.insert(record)
        entry = running.setdefault(space.key(cfg), [cfg, 0.0, 0])
        entry[1] += target.orient(record.performance)
        entry[2] += 1
        seen.append(inst)
        budget.evaluations += 1
        budget.iterations += 1
        trace.append(OnlineStep(n, inst.id, cfg, space.digest(cfg), record.performance, explored))
    iset = _stream_set(seen)
    model = _online_model(variant, scenario, running, archive, iset, seen) if seen else None
    return OnlineResult(model, trace, archive, iset, variant)


def _stream_set(seen: Sequence[Instance]) -> InstanceSet:
    out, ids = [], set()
    for inst in seen:
        if inst.id not in ids:
            ids.add(inst.id)
            out.append(inst)
    return InstanceSet(tuple(out))


def _online_scaler(scenario: "Scenario", seen: Sequence[Instance]) -> FeatureScaler:
    if scenario.scaler is not None:
        return scenario.scaler
    return FeatureScaler.fit([i.features for i in seen])


def _online_choice(n, inst, variant, rate, seed, space, cands, running, archive, seen, scenario):
    if not seen:
        return space.default(), False
    rng = rng_for(seed, 20, n)
    if rng.random() < rate:
        return cands[int(rng.integers(len(cands)))], True
    if variant == "reactive":
        return _best_running(running, space), False
    model = fit_surrogate(archive, _stream_set(seen), scenario.surrogate_k, _online_scaler(scenario, seen))
    scores = model.predict_scores(inst.features, cands)
    return argmax_enumerated(list(zip(cands, scores)), space), False


def _best_running(running: dict, space: ConfigurationSpace) -> Configuration:
    pairs = [(v[0], v[1] / v[2]) for _, v in sorted(running.items())]
    return argmax_enumerated(pairs, space)


def _online_model(variant, scenario, running, archive, iset, seen) -> Model:
    scaler = _online_scaler(scenario, seen)
    if variant == "reactive":
        cfg = _best_running(running, scenario.space)
        v = running[scenario.space.key(cfg)]
        cluster = _make_cluster(iset, iset.ids, scaler, cfg, v[1] / v[2])
        return PartitionModel(scenario.space, [cluster], scaler, archive.sense,
                              {"online_variant": variant})
    model = fit_surrogate(archive, iset, scenario.surrogate_k, scaler)
    model.metadata["online_variant"] = variant
    return model


def bootstrap_from_online(result: OnlineResult, mode: str) -> KepState:
    """Seed a new K-EP with an online run's model (mode="model") or archive (mode="archive")."""
    if mode not in ("model", "archive"):
        raise ValueError(f"unknown bootstrap mode {mode!r}")
    if not result.sealed:
        raise ValueError("online result is not sealed")
    state = KepState()
    if mode == "model":
        state.model = result.model
        state.initial_model = result.model
    elif len(result.archive):
        state.archive = result.archive.copy()
        state.instances = result.instances
    return state
