"""Render the comparison report: JSON summary plus figures.

The figures mirror the benchmark's three headline quantities (best trial
steps, benchmark trial steps, unique states visited) as baseline-vs-rewind
curves over the training budgets, written as PNG files next to the
delimited results.
"""
from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .experiment import AggregateRow

_FIGURES = (
    ("best_trial_steps", "Best trial steps", True),
    ("benchmark_trial_steps", "Benchmark trial steps", True),
    ("unique_states", "Unique states visited", False),
)


def write_comparison(out_dir: str | Path, rows: list[AggregateRow], comparison: dict) -> list[Path]:
    """Write comparison.json and one figure per compared metric.

    Returns the paths written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "comparison.json"]
    with open(written[0], "w", encoding="utf-8") as fh:
        json.dump(comparison, fh, sort_keys=True, indent=2)
        fh.write("\n")

    rows = sorted(rows, key=lambda r: r.budget)
    budgets = [r.budget for r in rows]
    for metric, title, log_y in _FIGURES:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for variant, style in (("baseline", "o-"), ("timewarp", "s-")):
            means = [getattr(r, variant).get(metric, {}).get("mean") for r in rows]
            stds = [getattr(r, variant).get(metric, {}).get("std", 0.0) for r in rows]
            if any(m is None for m in means):
                continue
            label = "without rewinding" if variant == "baseline" else "with rewinding"
            ax.errorbar(budgets, means, yerr=stds, fmt=style, capsize=3, label=label)
        ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("Total training steps")
        ax.set_ylabel(title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out / f"{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def format_comparison_text(comparison: dict) -> str:
    """Human-readable comparison summary for the CLI."""
    lines = ["budget      best-ratio  benchmark-ratio  unique-ratio"]
    for entry in comparison["per_budget"]:
        r = entry["ratios"]

        def fmt(v):
            return f"{v:10.3f}" if v is not None else "       n/a"

        lines.append(
            f"{entry['budget']:>8}  {fmt(r['best_trial_steps'])}  "
            f"{fmt(r['benchmark_trial_steps'])}       {fmt(r['unique_states'])}"
        )
    lines.append("")
    for name, value in comparison["average_improvement_pct"].items():
        text = "n/a" if value is None else f"{value:+.1f}%"
        lines.append(f"average improvement, {name}: {text}")
    for name, test in comparison["sign_tests"].items():
        lines.append(
            f"sign test ({name}, budgets {test['budgets']}): "
            f"{test['wins']}/{test['n']} wins, p={test['p_value']:.4g}"
        )
    return "\n".join(lines) + "\n"
