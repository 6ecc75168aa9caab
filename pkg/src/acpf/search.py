"""
Budgeted black-box maximization over a configuration space.

Scores are always oriented so that larger is better. An objective may raise
:class:`BudgetExhausted` on its own (e.g. when it is backed by a shared
evaluation budget); searches treat that exactly like running out of calls.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from ._rng import child_seed, rng_for
from .config_space import (TOO_LARGE, Configuration, ConfigurationSpace, enumerate_space, neighbors,
                           sample_uniform)

NEIGHBORHOOD_SIZE = 8
# consecutive restarts without a single new evaluation before we call the space exhausted
MAX_IDLE_RESTARTS = 200


class BudgetExhausted(Exception):
    pass


def _cardinality(space: ConfigurationSpace, limit: int = 10**4) -> float:
    """Size of a small finite space, else infinity."""
    pts = enumerate_space(space, limit)
    return math.inf if pts is TOO_LARGE else len(pts)


class Objective:
    """Counts calls to ``fn`` and refuses to exceed ``budget``."""

    def __init__(self, fn: Callable[[Configuration], float], budget: int) -> None:
        if budget < 1:
            raise ValueError("objective budget must be > 0")
        self.fn = fn
        self.budget = int(budget)
        self.calls = 0

    @property
    def remaining(self) -> int:
        return self.budget - self.calls

    def __call__(self, cfg: Configuration) -> float:
        if self.calls >= self.budget:
            raise BudgetExhausted
        score = float(self.fn(cfg))
        self.calls += 1
        return score


@dataclass
class SearchResult:
    best: Configuration
    best_score: float
    evaluations_used: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    population: list[tuple[Configuration, float]] | None = None


class _Memo:
    """Caches scores so revisiting a configuration never costs budget."""

    def __init__(self, obj: Objective, space: ConfigurationSpace) -> None:
        self.obj = obj
        self.space = space
        self.cache: dict[tuple, float] = {}
        self.best: Configuration | None = None
        self.best_score = -math.inf
        self.trace: list[tuple[int, float]] = []

    def __call__(self, cfg: Configuration) -> float:
        key = self.space.key(cfg)
        if key in self.cache:
            return self.cache[key]
        score = self.obj(cfg)
        self.cache[key] = score
        if self.best is None or score > self.best_score or (
                score == self.best_score and key < self.space.key(self.best)):
            self.best, self.best_score = cfg, score
        self.trace.append((self.obj.calls, self.best_score))
        return score

    def result(self, fallback: Configuration, population=None) -> SearchResult:
        if self.best is None:
            return SearchResult(fallback, -math.inf, self.obj.calls, [], population)
        return SearchResult(self.best, self.best_score, self.obj.calls, self.trace, population)


def local_search(obj: Objective, space: ConfigurationSpace, start: Configuration,
                 seed: int) -> SearchResult:
    """First-improvement hill climbing with uniform restarts at local optima."""
    memo = _Memo(obj, space)
    size = _cardinality(space)
    step = 0
    try:
        current = Configuration(start)
        current_score = memo(current)
        idle = 0
        while True:
            step += 1
            calls_before = obj.calls
            moved = False
            for cand in neighbors(space, current, child_seed(seed, 0, step), NEIGHBORHOOD_SIZE):
                score = memo(cand)
                if score > current_score:
                    current, current_score, moved = cand, score, True
                    break
            if not moved:
                current = sample_uniform(space, child_seed(seed, 1, step), 1)[0]
                current_score = memo(current)
            idle = idle + 1 if obj.calls == calls_before else 0
            if idle > MAX_IDLE_RESTARTS or len(memo.cache) >= size:
                break
    except BudgetExhausted:
        pass
    return memo.result(Configuration(start))


def evolutionary_search(obj: Objective, space: ConfigurationSpace, seed: int,
                        population_size: int) -> SearchResult:
    """(mu + lambda) evolution with mu = lambda = ``population_size``.

    Binary tournament selection, one-parameter mutation, truncation survival.
    The final population is sorted by descending score.
    """
    if population_size < 2:
        raise ValueError("population_size must be >= 2")
    memo = _Memo(obj, space)
    size = _cardinality(space)
    rng = rng_for(seed, 0)
    population: list[tuple[Configuration, float]] = []

    def survivors(pool):
        ranked = sorted(pool, key=lambda cs: (-cs[1], space.key(cs[0])))
        out, seen = [], set()
        for c, s in ranked:
            k = space.key(c)
            if k not in seen:
                seen.add(k)
                out.append((c, s))
        for c, s in ranked:  # duplicates only fill in when diversity runs out
            if len(out) >= population_size:
                break
            if (c, s) not in out:
                out.append((c, s))
        return out[:population_size]

    try:
        for cfg in sample_uniform(space, child_seed(seed, 1), population_size):
            population.append((cfg, memo(cfg)))
        generation = 0
        idle = 0
        while True:
            generation += 1
            calls_before = obj.calls
            offspring = []
            try:
                for j in range(population_size):
                    a, b = rng.integers(len(population), size=2)
                    parent = population[a] if population[a][1] >= population[b][1] else population[b]
                    moves = neighbors(space, parent[0], child_seed(seed, 2, generation, j), 1)
                    child = moves[0] if moves else parent[0]
                    offspring.append((child, memo(child)))
            finally:
                population = survivors(population + offspring)
            idle = idle + 1 if obj.calls == calls_before else 0
            if idle > MAX_IDLE_RESTARTS or len(memo.cache) >= size:
                break
    except BudgetExhausted:
        pass
    population = survivors(population) if population else []
    fallback = population[0][0] if population else space.default()
    return memo.result(fallback, population)


def argmax_enumerated(scored: Sequence[tuple[Mapping[str, Any], float]],
                      space: ConfigurationSpace) -> Configuration:
    """Highest-scoring configuration; ties go to the smallest canonical encoding."""
    if not scored:
        raise ValueError("argmax over an empty candidate list")
    best_cfg, best_score = scored[0]
    best_key = space.key(best_cfg)
    for cfg, score in scored[1:]:
        if score > best_score or (score == best_score and space.key(cfg) < best_key):
            best_cfg, best_score, best_key = cfg, score, space.key(cfg)
    return Configuration(best_cfg)


def enumerated_search(obj: Objective, space: ConfigurationSpace,
                      candidates: Sequence[Configuration]) -> SearchResult:
    """Score every candidate (until the budget runs out) and keep the argmax."""
    memo = _Memo(obj, space)
    scored = []
    try:
        for cfg in candidates:
            scored.append((cfg, memo(cfg)))
    except BudgetExhausted:
        pass
    if not scored:
        return memo.result(Configuration(candidates[0]) if candidates else space.default())
    best = argmax_enumerated(scored, space)
    return SearchResult(best, memo.cache[space.key(best)], obj.calls, memo.trace)
