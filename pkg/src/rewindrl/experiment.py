"""Benchmark protocol: train at increasing budgets, benchmark, aggregate.

For every budget and seed, the plain trial-resetting learner and the
rewindable learner run as a matched pair: same seed, same zero-initialized
tables, same random stream. Training consumes exactly the budget in forward
simulation steps (rewinds are bookkeeping and cost nothing); the running
trial is interrupted at the budget boundary. A benchmark trial with learning
and exploration disabled then measures how long the learned policy survives,
capped so runaway successes terminate.

Outputs: ``results.csv`` (one row per run), ``runs.jsonl`` (per-event
detail: rewind events, per-run transition graphs, run summaries) and
``aggregate.json`` (per-budget means and deviations).
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .cartpole import initial_state, step
from .config import ExperimentConfig
from .discretize import Discretizer
from .graph import TransitionGraph
from .session import StepRecord, TrainingSession

VARIANTS = ("baseline", "timewarp")
METRIC_NAMES = ("best_trial_steps", "benchmark_trial_steps", "unique_states",
                "trial_count", "rewind_count")


@dataclass(frozen=True)
class RunMetrics:
    """One row of the results table."""

    budget: int
    seed: int
    variant: str
    best_trial_steps: int
    benchmark_trial_steps: int
    unique_states: int
    trial_count: int
    rewind_count: int


@dataclass(frozen=True)
class AggregateRow:
    """Per-budget means and sample deviations across seeds, per variant."""

    budget: int
    baseline: dict
    timewarp: dict


@dataclass
class TrainingResult:
    session: TrainingSession
    metrics: RunMetrics
    graph: TransitionGraph
    events: list[dict]


def run_benchmark_trial(agent, config: ExperimentConfig) -> int:
    """Steps survived by the greedy policy from the start state (capped)."""
    discretizer = Discretizer(config.bounds, config.physics)
    state = initial_state()
    s = discretizer(state)
    for _ in range(config.benchmark_cap):
        outcome = step(state, agent.greedy_action(s), config.physics)
        if outcome.failed:
            return outcome.next_state.time_index
        state = outcome.next_state
        s = discretizer(state)
    return config.benchmark_cap


def run_training(
    config: ExperimentConfig,
    budget: int,
    seed: int,
    variant: str = "timewarp",
    step_listener: Callable[[StepRecord], None] | None = None,
) -> TrainingResult:
    """Train one (budget, seed, variant) cell and run its benchmark trial."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    session = TrainingSession(
        config, seed, budget=budget, timewarp_enabled=(variant == "timewarp")
    )
    for _ in range(budget):
        record = session.step_once()
        if step_listener is not None:
            step_listener(record)

    metrics = RunMetrics(
        budget=budget,
        seed=seed,
        variant=variant,
        best_trial_steps=session.best_steps,
        benchmark_trial_steps=run_benchmark_trial(session.agent, config),
        unique_states=session.unique_states(),
        trial_count=session.trial if budget > 0 else 0,
        rewind_count=session.rewind_count,
    )
    events = [
        {"type": "rewind", "budget": budget, "seed": seed, "variant": variant,
         **event.log_fields()}
        for event in session.rewind_events
    ]
    return TrainingResult(session=session, metrics=metrics, graph=session.graph, events=events)


# -- the full matrix ---------------------------------------------------------


def _cells(config: ExperimentConfig) -> list[tuple[int, str, int]]:
    return [
        (budget, variant, seed)
        for budget in config.budgets
        for variant in VARIANTS
        for seed in config.seeds
    ]


def _run_cell(args: tuple[ExperimentConfig, int, str, int]) -> tuple[RunMetrics, list[dict], dict]:
    config, budget, variant, seed = args
    result = run_training(config, budget, seed, variant)
    graph_event = {
        "type": "graph", "budget": budget, "seed": seed, "variant": variant,
        **result.graph.to_json_dict(),
    }
    return result.metrics, result.events, graph_event


def run_matrix(
    config: ExperimentConfig, out_dir: str | Path, parallelism: int = 1
) -> tuple[list[RunMetrics], list[AggregateRow]]:
    """Run every budget x seed x variant cell and write the output files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = _cells(config)
    args = [(config, budget, variant, seed) for budget, variant, seed in cells]

    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_run_cell, args))
    else:
        outcomes = [_run_cell(a) for a in args]

    all_metrics = [m for m, _, _ in outcomes]
    write_results_csv(out / "results.csv", all_metrics)
    with open(out / "runs.jsonl", "w", encoding="utf-8") as fh:
        for metrics, events, graph_event in outcomes:
            for event in events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.write(json.dumps(graph_event, sort_keys=True) + "\n")
            summary = {"type": "run", **asdict(metrics)}
            fh.write(json.dumps(summary, sort_keys=True) + "\n")

    rows = aggregate(all_metrics)
    with open(out / "aggregate.json", "w", encoding="utf-8") as fh:
        json.dump([asdict(row) for row in rows], fh, sort_keys=True, indent=2)
        fh.write("\n")
    return all_metrics, rows


def write_results_csv(path: str | Path, metrics: Iterable[RunMetrics]) -> None:
    columns = ["budget", "variant", "seed", "best_trial_steps",
               "benchmark_trial_steps", "unique_states", "trial_count", "rewind_count"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for m in metrics:
            writer.writerow([getattr(m, c) for c in columns])


def read_results_csv(path: str | Path) -> list[RunMetrics]:
    out: list[RunMetrics] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            kwargs = {
                f.name: (row[f.name] if f.name == "variant" else int(row[f.name]))
                for f in fields(RunMetrics)
            }
            out.append(RunMetrics(**kwargs))
    return out


def aggregate(metrics: Iterable[RunMetrics]) -> list[AggregateRow]:
    """Reduce per-seed rows to per-budget mean/std for each variant."""
    by_cell: dict[tuple[int, str], list[RunMetrics]] = {}
    for m in metrics:
        by_cell.setdefault((m.budget, m.variant), []).append(m)

    budgets = sorted({budget for budget, _ in by_cell})
    rows = []
    for budget in budgets:
        stats = {}
        for variant in VARIANTS:
            runs = by_cell.get((budget, variant), [])
            if not runs:
                continue
            stats[variant] = {
                name: {
                    "mean": float(np.mean([getattr(r, name) for r in runs])),
                    "std": (float(np.std([getattr(r, name) for r in runs], ddof=1))
                            if len(runs) >= 2 else 0.0),
                }
                for name in METRIC_NAMES
            }
        rows.append(AggregateRow(budget=budget,
                                 baseline=stats.get("baseline", {}),
                                 timewarp=stats.get("timewarp", {})))
    return rows


# -- comparison ---------------------------------------------------------------

COMPARED_METRICS = ("best_trial_steps", "benchmark_trial_steps", "unique_states")


def _sign_test(wins: int, n: int) -> float:
    """One-sided binomial tail P(X >= wins) under fair-coin pairing."""
    if n == 0:
        return 1.0
    return sum(math.comb(n, i) for i in range(wins, n + 1)) / 2.0**n


def compare(rows: list[AggregateRow], metrics: Iterable[RunMetrics] = ()) -> dict:
    """Rewind-vs-baseline report: per-budget ratios, average improvements,
    and paired sign tests across seeds at the four largest budgets.

    ``metrics`` supplies the per-seed rows the sign test needs; ratios come
    from the aggregate rows alone.
    """
    rows = sorted(rows, key=lambda r: r.budget)
    per_budget = []
    sums: dict[str, list[float]] = {name: [] for name in COMPARED_METRICS}
    for row in rows:
        if not row.baseline or not row.timewarp:
            raise ValueError(f"budget {row.budget} is missing a variant")
        ratios = {}
        for name in COMPARED_METRICS:
            base = row.baseline[name]["mean"]
            warp = row.timewarp[name]["mean"]
            ratios[name] = (warp / base) if base > 0 else None
            if ratios[name] is not None:
                sums[name].append(ratios[name])
        per_budget.append({"budget": row.budget, "ratios": ratios})

    improvement = {
        name: (float(np.mean([(r - 1.0) * 100.0 for r in values])) if values else None)
        for name, values in sums.items()
    }

    by_pair: dict[tuple[int, int], dict[str, RunMetrics]] = {}
    for m in metrics:
        by_pair.setdefault((m.budget, m.seed), {})[m.variant] = m
    top_budgets = sorted({r.budget for r in rows})[-4:]
    sign_tests = {}
    for name in COMPARED_METRICS:
        wins = ties = n = 0
        for (budget, _seed), pair in sorted(by_pair.items()):
            if budget not in top_budgets or len(pair) != 2:
                continue
            base = getattr(pair["baseline"], name)
            warp = getattr(pair["timewarp"], name)
            if warp == base:
                ties += 1
                continue
            n += 1
            wins += int(warp > base)
        sign_tests[name] = {
            "budgets": top_budgets,
            "wins": wins,
            "ties": ties,
            "n": n,
            "p_value": _sign_test(wins, n),
        }

    return {
        "per_budget": per_budget,
        "average_improvement_pct": improvement,
        "sign_tests": sign_tests,
    }
