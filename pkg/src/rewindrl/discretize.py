"""Box partition of the cart-pole state space into 3*6*3*3 = 162 cells.

Bins are half-open on the left except the topmost bin of each dimension,
which is closed so the cells exactly cover the non-failing region. Failing
states belong to no cell: failure is an absorbing outcome, not a state the
agent can occupy.

The cell index is mixed-radix with cart position outermost and pole angular
velocity innermost:  index = x_bin*54 + theta_bin*9 + xdot_bin*3 + thetadot_bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Final

from .cartpole import DEFAULT_PARAMS, ContinuousState, PhysicsParams, is_failure

N_STATES: Final = 162

# Discrete successor sentinel for transitions that end in failure.
FAILURE: Final = -1


@dataclass(frozen=True)
class BinBoundaries:
    """Interior bin edges per dimension (angles in degrees, the rest SI).

    The outer bounds are implied: +/- half the track for position, +/- 12
    degrees for the angle (the failure limits) and infinity for the two
    velocities.
    """

    x_edges: tuple[float, float] = (-0.8, 0.8)
    theta_edges_deg: tuple[float, float, float, float, float] = (-6.0, -1.0, 0.0, 1.0, 6.0)
    xdot_edges: tuple[float, float] = (-0.5, 0.5)
    thetadot_edges_deg: tuple[float, float] = (-50.0, 50.0)

    def __post_init__(self) -> None:
        for name, count in (
            ("x_edges", 2),
            ("theta_edges_deg", 5),
            ("xdot_edges", 2),
            ("thetadot_edges_deg", 2),
        ):
            edges = getattr(self, name)
            object.__setattr__(self, name, tuple(float(e) for e in edges))
            edges = getattr(self, name)
            if len(edges) != count:
                raise ValueError(f"{name} needs exactly {count} values, got {len(edges)}")
            if any(a >= b for a, b in zip(edges, edges[1:])):
                raise ValueError(f"{name} must be strictly increasing: {edges}")


def default_bounds() -> BinBoundaries:
    """The classic boxes-style edges used throughout this project."""
    return BinBoundaries()


def _bin(value: float, edges: tuple[float, ...]) -> int:
    """Index of the half-open bin containing ``value`` (top bin closed)."""
    for i, edge in enumerate(edges):
        if value < edge:
            return i
    return len(edges)


@dataclass(frozen=True)
class Discretizer:
    """Bound edges resolved to radians once, for the hot training loop."""

    bounds: BinBoundaries = field(default_factory=default_bounds)
    params: PhysicsParams = DEFAULT_PARAMS

    def __post_init__(self) -> None:
        theta = tuple(math.radians(e) for e in self.bounds.theta_edges_deg)
        theta_dot = tuple(math.radians(e) for e in self.bounds.thetadot_edges_deg)
        object.__setattr__(self, "_theta_edges", theta)
        object.__setattr__(self, "_thetadot_edges", theta_dot)

    def __call__(self, state: ContinuousState) -> int:
        if is_failure(state, self.params):
            raise ValueError("failing states have no cell")
        x_bin = _bin(state.x, self.bounds.x_edges)
        theta_bin = _bin(state.theta, self._theta_edges)
        xdot_bin = _bin(state.x_dot, self.bounds.xdot_edges)
        thetadot_bin = _bin(state.theta_dot, self._thetadot_edges)
        return x_bin * 54 + theta_bin * 9 + xdot_bin * 3 + thetadot_bin


_DEFAULT_DISCRETIZER = Discretizer()


def discretize(
    state: ContinuousState,
    bounds: BinBoundaries | None = None,
    params: PhysicsParams = DEFAULT_PARAMS,
) -> int:
    """Cell index of a non-failing state; raises ``ValueError`` on failure."""
    if bounds is None and params is DEFAULT_PARAMS:
        return _DEFAULT_DISCRETIZER(state)
    return Discretizer(bounds or default_bounds(), params)(state)
