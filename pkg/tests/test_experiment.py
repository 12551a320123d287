"""Protocol harness tests: matrix outputs, aggregation, comparison, config."""
import csv
import json

import pytest

from rewindrl.cartpole import Action
from rewindrl.config import ExperimentConfig, config_from_dict, config_to_dict, load_config
from rewindrl.experiment import (
    RunMetrics,
    aggregate,
    compare,
    read_results_csv,
    run_benchmark_trial,
    run_matrix,
    run_training,
)


def tiny_config(**kw):
    defaults = dict(budgets=(50, 100), seeds=(0, 1), benchmark_cap=300)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestRunTraining:
    def test_paired_variants_share_the_stream_start(self):
        cfg = tiny_config()
        base = run_training(cfg, 100, seed=7, variant="baseline")
        warp = run_training(cfg, 100, seed=7, variant="timewarp")
        # identical until the first failure handling diverges
        assert base.metrics.budget == warp.metrics.budget == 100

    def test_rerun_is_bit_identical(self):
        cfg = tiny_config()
        a = run_training(cfg, 200, seed=3, variant="baseline").metrics
        b = run_training(cfg, 200, seed=3, variant="baseline").metrics
        assert a == b

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            run_training(tiny_config(), 10, 0, variant="magic")


class TestBenchmarkTrial:
    def test_untrained_agent_fails_quickly(self):
        cfg = tiny_config()
        result = run_training(cfg, 0, seed=0, variant="baseline")
        steps = run_benchmark_trial(result.session.agent, cfg)
        assert 1 <= steps <= 30  # constant pushes tip the pole within ~10 steps

    def test_cap_semantics(self):
        class BalancingStub:
            # simple PD rule: push toward the lean
            def greedy_action(self, s):
                theta_bin = (s % 54) // 9
                return Action.PUSH_RIGHT if theta_bin >= 3 else Action.PUSH_LEFT

        cfg = tiny_config(benchmark_cap=10)
        assert run_benchmark_trial(BalancingStub(), cfg) == 10


class TestRunMatrix:
    def test_outputs_and_determinism(self, tmp_path):
        cfg = tiny_config()
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        metrics_a, rows_a = run_matrix(cfg, out_a)
        metrics_b, rows_b = run_matrix(cfg, out_b)
        csv_a = (out_a / "results.csv").read_bytes()
        csv_b = (out_b / "results.csv").read_bytes()
        assert csv_a == csv_b
        assert metrics_a == metrics_b

        with open(out_a / "results.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + len(cfg.budgets) * 2 * len(cfg.seeds)
        assert rows[0][:3] == ["budget", "variant", "seed"]

        lines = (out_a / "runs.jsonl").read_text().splitlines()
        kinds = {json.loads(line)["type"] for line in lines}
        assert {"run", "graph"} <= kinds
        agg = json.loads((out_a / "aggregate.json").read_text())
        assert [row["budget"] for row in agg] == list(cfg.budgets)
        assert "mean" in agg[0]["baseline"]["best_trial_steps"]

    def test_parallel_equals_serial(self, tmp_path):
        cfg = tiny_config()
        _, _ = run_matrix(cfg, tmp_path / "serial", parallelism=1)
        _, _ = run_matrix(cfg, tmp_path / "par", parallelism=2)
        assert (tmp_path / "serial" / "results.csv").read_bytes() == (
            tmp_path / "par" / "results.csv"
        ).read_bytes()

    def test_csv_round_trip(self, tmp_path):
        cfg = tiny_config()
        metrics, _ = run_matrix(cfg, tmp_path / "out")
        assert read_results_csv(tmp_path / "out" / "results.csv") == metrics


def fake_metrics(budget, seed, variant, best, bench, uniq):
    return RunMetrics(budget=budget, seed=seed, variant=variant,
                      best_trial_steps=best, benchmark_trial_steps=bench,
                      unique_states=uniq, trial_count=1, rewind_count=0)


class TestCompare:
    def test_identical_variants_give_unit_ratios(self):
        metrics = [
            fake_metrics(b, s, v, 100, 200, 50)
            for b in (100, 200) for s in (0, 1) for v in ("baseline", "timewarp")
        ]
        rows = aggregate(metrics)
        report = compare(rows, metrics)
        for entry in report["per_budget"]:
            assert all(r == 1.0 for r in entry["ratios"].values())
        assert all(v == 0.0 for v in report["average_improvement_pct"].values())
        # every pair ties: nothing to count
        assert all(t["n"] == 0 for t in report["sign_tests"].values())

    def test_ratios_and_sign_test(self):
        metrics = []
        for b in (100, 200, 300, 400):
            for s in range(5):
                metrics.append(fake_metrics(b, s, "baseline", 100, 100, 100))
                metrics.append(fake_metrics(b, s, "timewarp", 150, 80, 110))
        rows = aggregate(metrics)
        report = compare(rows, metrics)
        first = report["per_budget"][0]["ratios"]
        assert first["best_trial_steps"] == pytest.approx(1.5)
        assert first["benchmark_trial_steps"] == pytest.approx(0.8)
        assert report["average_improvement_pct"]["best_trial_steps"] == pytest.approx(50.0)
        best_test = report["sign_tests"]["best_trial_steps"]
        assert best_test["wins"] == best_test["n"] == 20
        assert best_test["p_value"] == pytest.approx(0.5**20)
        bench_test = report["sign_tests"]["benchmark_trial_steps"]
        assert bench_test["wins"] == 0
        assert bench_test["p_value"] == 1.0

    def test_mismatched_budgets_error(self):
        metrics = [fake_metrics(100, 0, "baseline", 1, 1, 1)]
        rows = aggregate(metrics)
        with pytest.raises(ValueError):
            compare(rows, metrics)

    def test_aggregate_deviations_need_two_seeds(self):
        metrics = [fake_metrics(100, 0, v, 10, 10, 10) for v in ("baseline", "timewarp")]
        rows = aggregate(metrics)
        assert rows[0].baseline["best_trial_steps"]["std"] == 0.0


class TestConfig:
    def test_defaults_match_the_protocol(self):
        cfg = ExperimentConfig()
        assert cfg.budgets == (100, 200, 500, 1000, 2000, 5000, 10000,
                               20000, 30000, 40000, 50000, 100000)
        assert len(cfg.seeds) == 10
        assert cfg.benchmark_cap == 500_000
        assert cfg.rewind_policy.kind == "halfway"

    def test_yaml_loading(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "algorithm: actor_critic\n"
            "budgets: [10, 20]\n"
            "seeds: [5]\n"
            "agent:\n"
            "  alpha: 0.25\n"
            "  lambda: 0.6\n"
            "rewind_policy:\n"
            "  kind: fixed_back\n"
            "  k: 4\n"
            "physics:\n"
            "  force_magnitude: 12.5\n"
            "bounds:\n"
            "  xdot_edges: [-1.0, 1.0]\n"
        )
        cfg = load_config(path)
        assert cfg.algorithm == "actor_critic"
        assert cfg.budgets == (10, 20)
        assert cfg.agent.alpha == 0.25
        assert cfg.agent.lam == 0.6
        assert cfg.rewind_policy.k == 4
        assert cfg.physics.force_magnitude == 12.5
        assert cfg.bounds.xdot_edges == (-1.0, 1.0)

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == ExperimentConfig()

    def test_env_seed_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("REWIND_SEED", "41,42")
        cfg = config_from_dict({})
        assert cfg.seeds == (41, 42)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(budgets=(100, 100))
        with pytest.raises(ValueError):
            ExperimentConfig(seeds=())
        with pytest.raises(ValueError):
            ExperimentConfig(benchmark_cap=0)
        with pytest.raises(ValueError):
            ExperimentConfig(algorithm="sarsa")

    def test_round_trip_through_dict(self):
        cfg = ExperimentConfig()
        echoed = config_to_dict(cfg)
        assert echoed["agent"]["lambda"] == cfg.agent.lam
        rebuilt = config_from_dict(json.loads(json.dumps(echoed)))
        assert rebuilt == cfg
