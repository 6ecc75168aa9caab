"""
Command line interface.

    acpf tune        --scenario S --model KIND [--strategy N] [--budget-evals N] [--seed N] --out DIR
    acpf recommend   --model FILE --instance FEATURES|CSV [--instance-id ID] [--pool POOL]
    acpf run-online  --scenario S --stream CSV --variant reactive|surrogate_online [--seed N] --out DIR
    acpf bench       --suite quadratic|cliff --strategies A,B --budget-evals N --seeds 0,1 --report CSV
    acpf gen-suite   --name quadratic|cliff --n N --seed N --out-dir DIR

Exit codes: 0 success, 2 invalid input or scenario, 3 target execution failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from .evaluation import TargetSpawnError, evaluate
from .fixtures import FAMILIES, make_suite, random_instances, regret
from .instances import InstanceError, Instance, load_instance_set, write_manifest
from .kep import ONLINE_VARIANTS, Budget, ModelKind, default_candidates, run_kep, run_online
from .models import dumps_model, load_model
from .recommend import CandidatePool, MissingInputError, recommend
from .scenario import ScenarioError, Scenario, load_scenario, synthetic_scenario_dict, scenario_from_dict

EXIT_OK, EXIT_INPUT, EXIT_TARGET = 0, 2, 3
REPORT_HEADER = ["strategy", "model", "budget", "seed", "mean_regret", "mean_perf", "wall_s"]


class InputError(ValueError):
    pass


def _budget(scenario: Scenario, evals: int | None) -> Budget:
    if evals is None:
        return scenario.budget.fresh()
    if evals <= 0:
        raise InputError("--budget-evals must be positive")
    return replace(scenario.budget.fresh(), max_evaluations=evals)


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def cmd_tune(args: argparse.Namespace) -> int:
    if args.parallelism is not None and args.parallelism < 1:
        raise InputError("--parallelism must be >= 1")
    scenario = load_scenario(args.scenario, parallelism=args.parallelism or os.cpu_count() or 1)
    budget = _budget(scenario, args.budget_evals)
    kind = ModelKind.parse(args.model)
    strategy = replace(scenario.strategy, name=args.strategy) if args.strategy else None
    model, state = run_kep(scenario, strategy, kind, budget, args.seed)
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "model.json"), dumps_model(model, scenario.hash))
    state.log.save(os.path.join(args.out, "runlog.ndjson"))
    state.archive.save(os.path.join(args.out, "archive.ndjson"))
    print(f"model={kind} iterations={state.t} evaluations={state.budget.evaluations}"
          f"/{state.budget.max_evaluations} records={len(state.archive)}")
    return EXIT_OK


def _parse_instance(text: str, instance_id: str | None) -> Instance:
    if os.path.exists(text):
        iset = load_instance_set(text)
        return iset[instance_id] if instance_id else iset[0]
    try:
        feats = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--instance is neither a manifest file nor a feature list: {text!r}") from None
    return Instance(instance_id or "query", feats)


def _parse_pool(text: str, space) -> CandidatePool:
    if text.startswith("grid:"):
        return CandidatePool(space, grid_steps=int(text.split(":", 1)[1]))
    if text.startswith("search:"):
        return CandidatePool(space, search_budget=int(text.split(":", 1)[1]))
    with open(text) as fh:
        data = json.load(fh)
    if isinstance(data, list):
        return CandidatePool(space, configurations=tuple(data))
    return CandidatePool.from_dict(data, space)


def cmd_recommend(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    inst = _parse_instance(args.instance, args.instance_id)
    pool = _parse_pool(args.pool, model.space) if args.pool else None
    rec = recommend(model, inst, pool=pool, mode=args.mode, seed=args.seed)
    print(json.dumps(rec.to_dict(model.space), sort_keys=True))
    return EXIT_OK


def cmd_run_online(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    stream = list(load_instance_set(args.stream))
    budget = _budget(scenario, args.budget_evals)
    if args.budget_evals is None and scenario.budget.max_evaluations is not None:
        budget = replace(budget, max_evaluations=max(scenario.budget.max_evaluations, len(stream)))
    result = run_online(scenario, stream, args.variant, budget, args.seed)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "trace.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arrival", "instance_id", "config_digest", "performance", "explored"])
        for s in result.trace:
            w.writerow([s.arrival, s.instance_id, s.digest, repr(s.performance), int(s.explored)])
    if result.model is not None:
        _write(os.path.join(args.out, "model.json"), dumps_model(result.model, scenario.hash))
    result.archive.save(os.path.join(args.out, "archive.ndjson"))
    print(f"variant={args.variant} arrivals={len(result.trace)}")
    return EXIT_OK


def bench_row(suite_name: str, strategy: str, budget_evals: int, seed: int,
              n_train: int = 30, n_test: int = 100) -> dict:
    """Tune one strategy on a synthetic suite and score it on held-out instances."""
    start = time.perf_counter()
    suite = make_suite(suite_name, n_train, n_test, seed)
    scenario = scenario_from_dict(synthetic_scenario_dict(suite_name, n_train, budget_evals))
    budget = Budget(max_evaluations=budget_evals)
    if strategy.startswith("online:"):
        variant = strategy.split(":", 1)[1]
        if variant not in ONLINE_VARIANTS:
            raise InputError(f"unknown strategy {strategy!r}")
        stream = random_instances(suite_name, budget_evals, seed, prefix="stream")
        model = run_online(scenario, stream, variant, budget, seed).model
        label = "partition:1" if variant == "reactive" else "surrogate"
    else:
        try:
            kind = ModelKind.parse(strategy)
        except ValueError:
            raise InputError(f"unknown strategy {strategy!r}") from None
        model, _ = run_kep(scenario, None, kind, budget, seed)
        label = str(kind)
    pool = default_candidates(scenario.space, scenario.pool)
    regrets, perfs = [], []
    for inst in suite.test:
        cfg = recommend(model, inst, pool=pool, scaler=scenario.scaler).configuration
        regrets.append(regret(suite.oracle, inst, cfg, suite.target))
        perfs.append(evaluate(suite.target, inst, cfg, 0).performance)
    return {"strategy": strategy, "model": label, "budget": budget_evals, "seed": seed,
            "mean_regret": float(np.mean(regrets)), "mean_perf": float(np.mean(perfs)),
            "wall_s": round(time.perf_counter() - start, 3)}


def cmd_bench(args: argparse.Namespace) -> int:
    if args.suite not in FAMILIES:
        raise InputError(f"bench needs a synthetic suite with a closed-form oracle, got {args.suite!r}")
    strategies = [s for s in args.strategies.split(",") if s]
    seeds = [int(s) for s in args.seeds.split(",") if s]
    if not strategies or not seeds:
        raise InputError("need at least one strategy and one seed")
    if args.budget_evals <= 0:
        raise InputError("--budget-evals must be positive")
    for s in strategies:  # fail before doing any work
        if not s.startswith("online:"):
            try:
                ModelKind.parse(s)
            except ValueError:
                raise InputError(f"unknown strategy {s!r}") from None
        elif s.split(":", 1)[1] not in ONLINE_VARIANTS:
            raise InputError(f"unknown strategy {s!r}")
    rows = [bench_row(args.suite, s, args.budget_evals, seed, args.n_train, args.n_test)
            for s in strategies for seed in seeds]
    with open(args.report, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_HEADER)
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"{r['strategy']:<32} seed={r['seed']:<4} regret={r['mean_regret']:.4f} perf={r['mean_perf']:.4f}")
    return EXIT_OK


def cmd_gen_suite(args: argparse.Namespace) -> int:
    if args.name not in FAMILIES:
        raise InputError(f"unknown suite {args.name!r}")
    if args.n < 1:
        raise InputError("--n must be >= 1")
    suite = make_suite(args.name, args.n, 1, args.seed)
    out = args.out_dir
    os.makedirs(os.path.join(out, "payloads"), exist_ok=True)
    paths = {}
    for inst in suite.train:
        rel = os.path.join("payloads", f"{inst.id}.json")
        _write(os.path.join(out, rel), json.dumps({"features": list(inst.features)}) + "\n")
        paths[inst.id] = rel
    write_manifest(os.path.join(out, "manifest.csv"), suite.train, paths)
    raw = synthetic_scenario_dict(args.name, args.n)
    raw["instances"] = {"manifest": "manifest.csv"}
    _write(os.path.join(out, "scenario.json"), json.dumps(raw, indent=2, sort_keys=True) + "\n")
    ext = dict(raw)
    ext["target"] = {"kind": "external", "sense": "maximize", "cutoff_seconds": 10.0,
                     "penalized_value": -1.0,
                     "command": f"{sys.executable} -m acpf.wrapper --family {suite.target.synthetic_name} "
                                "--seed {seed} {instance}"}
    ext["budget"] = {"max_evaluations": 40}
    _write(os.path.join(out, "scenario_external.json"), json.dumps(ext, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(suite.train)} instances to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acpf", description="Algorithm configuration framework")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tune", help="run a knowledge-encoding process and save the model")
    t.add_argument("--scenario", required=True)
    t.add_argument("--model", required=True,
                   help="mapping | surrogate | aggregate | partition:C | composite:perproblem+surrogate")
    t.add_argument("--strategy", choices=["uniform", "epsilon_greedy", "search_driven"])
    t.add_argument("--budget-evals", type=int)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--parallelism", type=int, default=None, help="default: available processors")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_tune)

    r = sub.add_parser("recommend", help="recommend a configuration for one instance")
    r.add_argument("--model", required=True)
    r.add_argument("--instance", required=True, help="comma-separated features or a manifest CSV")
    r.add_argument("--instance-id")
    r.add_argument("--pool", help="JSON file, grid:STEPS or search:BUDGET")
    r.add_argument("--mode", choices=["representative", "average"], default="representative")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_recommend)

    o = sub.add_parser("run-online", help="configure online over an instance stream")
    o.add_argument("--scenario", required=True)
    o.add_argument("--stream", required=True)
    o.add_argument("--variant", choices=list(ONLINE_VARIANTS), default="reactive")
    o.add_argument("--budget-evals", type=int)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_run_online)

    b = sub.add_parser("bench", help="compare strategies on a synthetic suite")
    b.add_argument("--suite", required=True)
    b.add_argument("--strategies", required=True)
    b.add_argument("--budget-evals", type=int, default=600)
    b.add_argument("--seeds", default="0")
    b.add_argument("--n-train", type=int, default=30)
    b.add_argument("--n-test", type=int, default=100)
    b.add_argument("--report", required=True)
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen-suite", help="write a synthetic manifest, payloads and scenarios")
    g.add_argument("--name", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_gen_suite)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TargetSpawnError as exc:
        print(f"acpf: target failure: {exc}", file=sys.stderr)
        return EXIT_TARGET
    except (ScenarioError, InputError, InstanceError, MissingInputError, ValueError, KeyError,
            OSError, json.JSONDecodeError) as exc:
        print(f"acpf: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
