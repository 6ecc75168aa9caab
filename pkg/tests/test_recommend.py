from __future__ import annotations

import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acpf.config_space import Configuration, grid, sample_uniform, validate
from acpf.evaluation import EvalArchive, evaluate, synthetic_target
from acpf.fixtures import make_suite, s2_space
from acpf.instances import FeatureScaler, Instance, InstanceSet
from acpf.models import (Cluster, PartitionModel, aggregate, fit_mapping, fit_partition,
                         fit_surrogate)
from acpf.recommend import (CandidatePool, MissingInputError, recommend, recommend_partition)
from acpf.search import Objective, enumerated_search

QV = synthetic_target("quadratic_valley")
SPACE = s2_space()
GRID = grid(SPACE, 11)


def full_archive(iset, cfgs=GRID):
    arch = EvalArchive(SPACE)
    for inst in iset:
        for c in cfgs:
            arch.insert(evaluate(QV, inst, c, 0))
    return arch


@pytest.fixture(scope="module")
def train():
    return make_suite("quadratic", 30, 1, 0).train


@pytest.fixture(scope="module")
def archive(train):
    return full_archive(train)


def two_cluster_model(reps=(0.25, 0.75)):
    clusters = []
    for j, (f, m) in enumerate(zip(reps, "ab")):
        clusters.append(Cluster([f"c{j}"], np.array([[f]]), f"c{j}", (f,),
                                Configuration(x=f, m=m), 1.0))
    return PartitionModel(SPACE, clusters, FeatureScaler((0.0,), (1.0,)))


# -- pools -------------------------------------------------------------------

def test_pool_validation():
    with pytest.raises(ValueError):
        CandidatePool(SPACE)
    with pytest.raises(ValueError):
        CandidatePool(SPACE, configurations=())
    with pytest.raises(ValueError):
        CandidatePool(SPACE, configurations=(GRID[0], GRID[0]))
    with pytest.raises(ValueError):
        CandidatePool(SPACE, grid_steps=3, search_budget=4)
    assert len(CandidatePool(SPACE, grid_steps=11).candidates()) == 22


@pytest.mark.parametrize("pool", [
    CandidatePool(SPACE, configurations=tuple(GRID[:3])),
    CandidatePool(SPACE, grid_steps=5),
    CandidatePool(SPACE, search_budget=30),
])
def test_pool_dict_roundtrip(pool):
    assert CandidatePool.from_dict(pool.to_dict(), SPACE) == pool


# -- mapping ------------------------------------------------------------------

def test_mapping_training_query(train, archive):
    model = fit_mapping(archive, train)
    inst = train["train-0007"]
    rec = recommend(model, inst)
    assert rec.configuration == model.labels[model.ids.index("train-0007")]
    assert rec.detail["nearest_id"] == "train-0007"
    assert rec.source == "mapping"


def test_mapping_query_021(train, archive):
    rec = recommend(fit_mapping(archive, train), Instance("q", (0.21,)))
    assert rec.configuration["m"] == "a"
    assert abs(rec.configuration["x"] - 0.21) <= 0.05


def test_mapping_dimension_mismatch(train, archive):
    with pytest.raises(ValueError):
        recommend(fit_mapping(archive, train), (0.1, 0.2))


# -- surrogate ---------------------------------------------------------------------

def test_surrogate_pool_of_one(train, archive):
    model = fit_surrogate(archive, train)
    rec = recommend(model, (0.4,), pool=[GRID[5]])
    assert rec.configuration == GRID[5]
    assert "predicted_performance" in rec.detail


def test_surrogate_pool_hits_archive_best(train, archive):
    model = fit_surrogate(archive, train, k=1)
    inst = train["train-0010"]
    best = max(archive.scores(inst.id).values(), key=lambda cs: cs[1])[0]
    pool = [c for c in GRID[::3] if c != best] + [best]
    assert recommend(model, inst, pool=pool).configuration == best


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_surrogate_equals_bruteforce_argmax(seed, f):
    train = make_suite("quadratic", 10, 1, 0).train
    model = fit_surrogate(full_archive(train, sample_uniform(SPACE, seed, 6)), train, k=3)
    pool = sample_uniform(SPACE, seed + 1, 12)
    pool = list({SPACE.key(c): c for c in pool}.values())
    preds = [model.predict_score((f,), c) for c in pool]
    top = max(preds)
    expect = min((c for c, p in zip(pool, preds) if p == top), key=SPACE.key)
    assert recommend(model, (f,), pool=pool).configuration == expect


def test_surrogate_search_pool(train, archive):
    model = fit_surrogate(archive, train, k=1)
    rec = recommend(model, (0.3,), pool=CandidatePool(SPACE, search_budget=60))
    assert validate(SPACE, rec.configuration).ok


def test_surrogate_needs_pool(train, archive):
    with pytest.raises(MissingInputError):
        recommend(fit_surrogate(archive, train), (0.3,))


def _refit_hits(query: float, runs: int = 100) -> int:
    hits = 0
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        iset = InstanceSet(tuple(Instance(f"s{j:03d}", (f,))
                                 for j, f in enumerate(rng.uniform(0, 1, 500))))
        arch = EvalArchive(SPACE)
        for inst, c in zip(iset, sample_uniform(SPACE, seed, 500)):
            arch.insert(evaluate(QV, inst, c, 0))
        cfg = recommend(fit_surrogate(arch, iset, k=5), (query,), pool=GRID).configuration
        hits += abs(cfg["x"] - query) < 1e-9 and cfg["m"] == ("a" if query < 0.5 else "b")
    return hits


@pytest.mark.parametrize("query", [0.3, 0.7])
def test_surrogate_recovers_grid_optimum_statistically(query):
    assert _refit_hits(query) >= 95


@pytest.mark.xfail(strict=True, reason="k-NN smoothing cannot resolve the m step located exactly at f=0.5")
def test_surrogate_recovers_optimum_at_step():
    assert _refit_hits(0.5) >= 95


# -- partition ------------------------------------------------------------------

def test_partition_c1_any_query(train):
    def tuner(members, seed):
        return enumerated_search(Objective(lambda c: 0.5 if c == GRID[3] else 0.0, 30), SPACE, GRID)
    model = fit_partition(train, train.scaler(), 1, tuner, 0, space=SPACE)
    for q in (0.0, 0.5, 3.0):
        assert recommend(model, (q,), scaler=train.scaler()).configuration == GRID[3]


def test_partition_representative_examples():
    model = two_cluster_model()
    sc = model.scaler
    assert recommend_partition(model, (0.4,), sc).detail["cluster"] == 0
    assert recommend_partition(model, (0.75,), sc).detail["cluster"] == 1
    # equidistant query: smallest index
    assert recommend_partition(model, (0.5,), sc).detail["cluster"] == 0


def test_partition_average_mode():
    a = Cluster(["p", "q"], np.array([[0.0], [0.6]]), "p", (0.0,), Configuration(x=0.0, m="a"), 1.0)
    b = Cluster(["r"], np.array([[0.5]]), "r", (0.5,), Configuration(x=0.5, m="b"), 1.0)
    model = PartitionModel(SPACE, [a, b], FeatureScaler((0.0,), (1.0,)))
    # representative: |0.2-0| < |0.2-0.5|; average: mean(0.2, 0.4)=0.3 == 0.3 -> tie, index 0
    assert recommend(model, (0.2,), mode="representative").detail["cluster"] == 0
    assert recommend(model, (0.25,), mode="average").detail["cluster"] == 1


def test_partition_missing_scaler():
    model = two_cluster_model()
    bare = PartitionModel(SPACE, model.clusters, None)
    with pytest.raises(MissingInputError):
        recommend(bare, (0.3,))
    assert recommend(bare, (0.3,), scaler=model.scaler).detail["cluster"] == 0


def test_partition_dimension_mismatch():
    with pytest.raises(ValueError):
        recommend(two_cluster_model(), (0.3, 0.1))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6, unique=True), st.floats(-5, 5),
       st.floats(0.01, 100))
def test_partition_scale_invariance(reps, q, scale):
    clusters = [Cluster([f"c{j}"], np.array([[f]]), f"c{j}", (f,), GRID[j], 1.0)
                for j, f in enumerate(reps)]
    lo, hi = min(reps + [q]), max(reps + [q])
    base = PartitionModel(SPACE, clusters, FeatureScaler((lo,), (hi,)))
    scaled_clusters = [Cluster(c.member_ids, c.member_features * scale, c.representative_id,
                               (c.representative_features[0] * scale,), c.configuration, 1.0)
                       for c in clusters]
    scaled = PartitionModel(SPACE, scaled_clusters, FeatureScaler((lo * scale,), (hi * scale,)))
    d = [abs(f - q) for f in reps]
    if sorted(d)[0] + 1e-9 >= sorted(d)[1]:
        return  # near tie: floating rounding may legitimately flip it
    assert recommend(base, (q,)).configuration == recommend(scaled, (q * scale,)).configuration


# -- aggregate / dispatch ---------------------------------------------------------

def test_aggregate_recommendation(train, archive):
    model = aggregate(archive, GRID, train)
    rec = recommend(model, (0.9,))
    assert rec.configuration == model.best()[0]
    assert rec.source == "aggregate"


def test_recommend_rejects_non_model():
    with pytest.raises(TypeError):
        recommend(object(), (0.1,))


def test_recommendations_valid_and_fast(train, archive):
    sur = fit_surrogate(archive, train)
    models = [fit_mapping(archive, train), aggregate(archive, GRID, train), two_cluster_model()]
    queries = np.random.default_rng(0).uniform(0, 1, 50)
    for m in models:
        for q in queries:
            rec = recommend(m, (q,))
            assert validate(SPACE, rec.configuration).ok
            assert rec.elapsed_seconds < 0.1
    times = [recommend(sur, (q,), pool=GRID).elapsed_seconds for q in queries]
    assert statistics.median(times) < 0.1
