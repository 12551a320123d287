"""Discrete state-transition multigraph recorded during training.

The graph is cumulative over a whole training run: rewinds never erase
transitions, so the sum of the edge counts equals the number of forward
simulation steps taken. Failure is a single aggregated sink node,
represented by the FAILURE sentinel (-1) and rendered as "failure".
"""
from __future__ import annotations

import json

from .discretize import FAILURE


class TransitionGraph:
    """Nodes are cell indices (plus the failure sink); edges carry visit counts."""

    def __init__(self) -> None:
        self.nodes: set[int] = set()
        self.edges: dict[tuple[int, int], int] = {}

    def record_transition(self, frm: int, to: int) -> None:
        self.nodes.add(frm)
        self.nodes.add(to)
        key = (frm, to)
        self.edges[key] = self.edges.get(key, 0) + 1

    def unique_state_count(self) -> int:
        """Distinct non-failure states visited so far."""
        return len(self.nodes) - (1 if FAILURE in self.nodes else 0)

    def total_transitions(self) -> int:
        return sum(self.edges.values())

    def export(self, format: str) -> str:
        """Deterministic serialization; ``format`` is ``dot`` or ``json``."""
        if format == "dot":
            return self._to_dot()
        if format == "json":
            return self._to_json()
        raise ValueError(f"unknown export format {format!r}")

    def _node_name(self, node: int) -> str:
        return "failure" if node == FAILURE else str(node)

    def _to_dot(self) -> str:
        lines = ["digraph transitions {"]
        for node in sorted(self.nodes):
            lines.append(f'  "{self._node_name(node)}";')
        for (frm, to), count in sorted(self.edges.items()):
            lines.append(f'  "{self._node_name(frm)}" -> "{self._node_name(to)}" [weight={count}];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def _to_json(self) -> str:
        payload = {
            "nodes": sorted(self.nodes),
            "edges": [
                {"from": frm, "to": to, "count": count}
                for (frm, to), count in sorted(self.edges.items())
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_json_dict(self) -> dict:
        return json.loads(self._to_json())

    @classmethod
    def from_json_dict(cls, payload: dict) -> "TransitionGraph":
        graph = cls()
        graph.nodes = set(payload.get("nodes", []))
        for edge in payload.get("edges", []):
            key = (edge["from"], edge["to"])
            graph.nodes.add(key[0])
            graph.nodes.add(key[1])
            graph.edges[key] = graph.edges.get(key, 0) + edge["count"]
        return graph

    def merge(self, other: "TransitionGraph") -> None:
        self.nodes |= other.nodes
        for key, count in other.edges.items():
            self.edges[key] = self.edges.get(key, 0) + count
