"""Command-line interface.

Subcommands: ``run`` (full benchmark matrix + comparison report), ``compare``
(report from two existing output directories), ``export-graph`` (transition
graph from a runs.jsonl) and ``serve`` (live control service).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiment, report
from .config import load_config
from .graph import TransitionGraph
from .service import DEFAULT_PORT, serve


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = Path(args.out)
    metrics, rows = experiment.run_matrix(config, out, parallelism=args.parallelism)
    comparison = experiment.compare(rows, metrics)
    report.write_comparison(out, rows, comparison)
    sys.stdout.write(report.format_comparison_text(comparison))
    print(f"outputs written to {out}/")
    return 0


def _load_side(directory: str, variant: str) -> list[experiment.RunMetrics]:
    rows = experiment.read_results_csv(Path(directory) / "results.csv")
    selected = [m for m in rows if m.variant == variant]
    if not selected:
        # a single-variant directory supplies whatever it has for this side
        selected = [experiment.RunMetrics(**{**m.__dict__, "variant": variant}) for m in rows]
    return selected


def _cmd_compare(args: argparse.Namespace) -> int:
    metrics = _load_side(args.a, "baseline") + _load_side(args.b, "timewarp")
    rows = experiment.aggregate(metrics)
    comparison = experiment.compare(rows, metrics)
    report.write_comparison(Path(args.out), rows, comparison)
    sys.stdout.write(report.format_comparison_text(comparison))
    return 0


def _cmd_export_graph(args: argparse.Namespace) -> int:
    merged = TransitionGraph()
    found = 0
    with open(args.run, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            if entry.get("type") != "graph":
                continue
            if args.budget is not None and entry.get("budget") != args.budget:
                continue
            if args.seed is not None and entry.get("seed") != args.seed:
                continue
            if args.variant is not None and entry.get("variant") != args.variant:
                continue
            merged.merge(TransitionGraph.from_json_dict(entry))
            found += 1
    if found == 0:
        print("no matching graph entries in the log", file=sys.stderr)
        return 1
    text = merged.export(args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    panel = Path(args.panel) if args.panel else Path("frontend") / "dist"
    serve(
        config,
        port=args.port,
        out_dir=args.out,
        panel_dir=panel if panel.is_dir() else None,
        host=args.host,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rewindrl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full benchmark matrix")
    p_run.add_argument("--config", help="YAML config file (defaults when omitted)")
    p_run.add_argument("--out", default="results", help="output directory")
    p_run.add_argument("--parallelism", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="compare two output directories")
    p_cmp.add_argument("--a", required=True, help="baseline-side output directory")
    p_cmp.add_argument("--b", required=True, help="rewind-side output directory")
    p_cmp.add_argument("--out", default="comparison", help="report directory")
    p_cmp.set_defaults(func=_cmd_compare)

    p_graph = sub.add_parser("export-graph", help="export a transition graph from runs.jsonl")
    p_graph.add_argument("--run", required=True, help="runs.jsonl path")
    p_graph.add_argument("--format", choices=("dot", "json"), required=True)
    p_graph.add_argument("--out", help="output file (stdout when omitted)")
    p_graph.add_argument("--budget", type=int)
    p_graph.add_argument("--seed", type=int)
    p_graph.add_argument("--variant", choices=experiment.VARIANTS)
    p_graph.set_defaults(func=_cmd_export_graph)

    p_serve = sub.add_parser("serve", help="start the live control service")
    p_serve.add_argument("--config", help="YAML config file")
    p_serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--out", help="directory for the event log")
    p_serve.add_argument("--panel", help="built control-panel directory to serve at /")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
