"""Experiment configuration: defaults, YAML file loading, env overrides.

Every field has a default, so an empty config file reproduces the standard
benchmark protocol. The ``REWIND_SEED`` environment variable (a seed or a
comma-separated list) overrides the seed list for quick smoke runs.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .agents import AgentConfig
from .cartpole import PhysicsParams
from .discretize import BinBoundaries
from .timewarp import RewindPolicy

DEFAULT_BUDGETS = (100, 200, 500, 1000, 2000, 5000, 10000, 20000, 30000, 40000, 50000, 100000)
DEFAULT_SEEDS = tuple(range(10))


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "q_learning"
    timewarp_enabled: bool = True
    rewind_policy: RewindPolicy = field(default_factory=RewindPolicy)
    agent: AgentConfig = field(default_factory=AgentConfig)
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    bounds: BinBoundaries = field(default_factory=BinBoundaries)
    budgets: tuple[int, ...] = DEFAULT_BUDGETS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    benchmark_cap: int = 500_000
    snapshot_capacity: int = 0
    snapshot_traces: bool = True

    def __post_init__(self) -> None:
        if self.algorithm not in ("q_learning", "actor_critic"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if any(a >= b for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError("budgets must be strictly increasing")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.benchmark_cap <= 0:
            raise ValueError("benchmark_cap must be positive")


def _section(data: dict, key: str) -> dict:
    sub = data.get(key, {})
    if sub is None:
        return {}
    if not isinstance(sub, dict):
        raise ValueError(f"config section {key!r} must be a mapping")
    return dict(sub)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a parsed YAML mapping (missing keys -> defaults)."""
    data = dict(data or {})

    agent_kwargs = _section(data, "agent")
    if "lambda" in agent_kwargs:  # the file spells the trace decay naturally
        agent_kwargs["lam"] = agent_kwargs.pop("lambda")
    policy_kwargs = _section(data, "rewind_policy")
    physics_kwargs = _section(data, "physics")
    bounds_kwargs = _section(data, "bounds")

    kwargs: dict = {}
    for name in ("algorithm", "timewarp_enabled", "budgets", "seeds",
                 "benchmark_cap", "snapshot_capacity", "snapshot_traces"):
        if name in data:
            kwargs[name] = data[name]
    kwargs["agent"] = AgentConfig(**agent_kwargs)
    kwargs["rewind_policy"] = RewindPolicy(**policy_kwargs)
    kwargs["physics"] = PhysicsParams(**physics_kwargs)
    kwargs["bounds"] = BinBoundaries(**bounds_kwargs)
    config = ExperimentConfig(**kwargs)

    env_seeds = os.environ.get("REWIND_SEED")
    if env_seeds:
        seeds = tuple(int(s) for s in env_seeds.split(",") if s.strip())
        config = replace(config, seeds=seeds)
    return config


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load a YAML config file; ``None`` yields pure defaults."""
    if path is None:
        return config_from_dict({})
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping at the top level")
    return config_from_dict(data)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain-JSON rendition (used for the service hello and run provenance)."""
    agent = {f.name: getattr(config.agent, f.name) for f in fields(AgentConfig)}
    agent["lambda"] = agent.pop("lam")
    return {
        "algorithm": config.algorithm,
        "timewarp_enabled": config.timewarp_enabled,
        "rewind_policy": {f.name: getattr(config.rewind_policy, f.name) for f in fields(RewindPolicy)},
        "agent": agent,
        "physics": {f.name: getattr(config.physics, f.name) for f in fields(PhysicsParams)},
        "bounds": {
            "x_edges": list(config.bounds.x_edges),
            "theta_edges_deg": list(config.bounds.theta_edges_deg),
            "xdot_edges": list(config.bounds.xdot_edges),
            "thetadot_edges_deg": list(config.bounds.thetadot_edges_deg),
        },
        "budgets": list(config.budgets),
        "seeds": list(config.seeds),
        "benchmark_cap": config.benchmark_cap,
        "snapshot_capacity": config.snapshot_capacity,
        "snapshot_traces": config.snapshot_traces,
    }
