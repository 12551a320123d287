"""Deterministic fixed-timestep cart-pole simulation.

Frictionless inverted pendulum on a cart, integrated with explicit Euler
(positions advance with pre-step velocities). The pole is a uniform rod;
``pole_length`` is the full length and the dynamics use the half-length.
Failure means the pole tilting past 12 degrees from upright or the cart
leaving the track; the reward is -1 on failure and 0 otherwise.

All functions are pure over immutable value types, so any number of
concurrent runs may share them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

# Tilting past this angle (strictly) is a failure. Exactly 12 degrees is
# still balancing, which lets the six angle bins cover the whole legal range.
FAILURE_ANGLE = math.radians(12.0)


class Action(IntEnum):
    """The two fixed-magnitude pushes. Integer values index policy tables."""

    PUSH_LEFT = 0
    PUSH_RIGHT = 1


@dataclass(frozen=True)
class PhysicsParams:
    """Physical constants of the simulation (SI units)."""

    track_length: float = 4.4
    pole_length: float = 1.0
    pole_mass: float = 0.1
    cart_mass: float = 1.0
    dt: float = 0.02
    force_magnitude: float = 10.0
    gravity: float = 9.8

    def __post_init__(self) -> None:
        for name in (
            "track_length",
            "pole_length",
            "pole_mass",
            "cart_mass",
            "dt",
            "force_magnitude",
            "gravity",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def half_track(self) -> float:
        return self.track_length / 2.0

    @property
    def half_pole(self) -> float:
        return self.pole_length / 2.0


@dataclass(frozen=True)
class ContinuousState:
    """Exact cart-pole state.

    ``x`` is measured from the track centre, ``theta`` from upright
    (radians, positive clockwise). ``time_index`` counts steps since the
    start of the current trial.
    """

    x: float
    x_dot: float
    theta: float
    theta_dot: float
    time_index: int = 0

    def __post_init__(self) -> None:
        if self.time_index < 0:
            raise ValueError("time_index must be non-negative")

    def mirrored(self) -> "ContinuousState":
        """Reflect the state through the track centre (negate all coords)."""
        return ContinuousState(
            -self.x, -self.x_dot, -self.theta, -self.theta_dot, self.time_index
        )


@dataclass(frozen=True)
class StepOutcome:
    next_state: ContinuousState
    reward: float
    failed: bool


DEFAULT_PARAMS = PhysicsParams()


def initial_state() -> ContinuousState:
    """Trial start: cart centred, pole upright, everything at rest."""
    return ContinuousState(0.0, 0.0, 0.0, 0.0, 0)


def is_failure(state: ContinuousState, params: PhysicsParams = DEFAULT_PARAMS) -> bool:
    """True iff the pole has tilted past 12 degrees or the cart left the track."""
    return abs(state.theta) > FAILURE_ANGLE or abs(state.x) > params.half_track


def integrate_force(
    state: ContinuousState, force: float, params: PhysicsParams = DEFAULT_PARAMS
) -> ContinuousState:
    """One Euler step under an arbitrary horizontal force (no failure logic).

    Exposed separately so coasting behaviour (force 0) can be probed, e.g.
    for energy-conservation checks.
    """
    sin_t = math.sin(state.theta)
    cos_t = math.cos(state.theta)
    m_total = params.cart_mass + params.pole_mass
    l_half = params.half_pole

    theta_acc = (
        params.gravity * sin_t
        + cos_t * (-force - params.pole_mass * l_half * state.theta_dot**2 * sin_t) / m_total
    ) / (l_half * (4.0 / 3.0 - params.pole_mass * cos_t**2 / m_total))
    x_acc = (
        force + params.pole_mass * l_half * (state.theta_dot**2 * sin_t - theta_acc * cos_t)
    ) / m_total

    dt = params.dt
    return ContinuousState(
        x=state.x + dt * state.x_dot,
        x_dot=state.x_dot + dt * x_acc,
        theta=state.theta + dt * state.theta_dot,
        theta_dot=state.theta_dot + dt * theta_acc,
        time_index=state.time_index + 1,
    )


def step(
    state: ContinuousState, action: Action, params: PhysicsParams = DEFAULT_PARAMS
) -> StepOutcome:
    """Advance one time slice under the chosen push.

    Raises ``ValueError`` for a failing input state: a failed simulation has
    to be reset or rewound before it can be stepped again.
    """
    if is_failure(state, params):
        raise ValueError("cannot step a failing state; reset or rewind first")
    force = params.force_magnitude if action == Action.PUSH_RIGHT else -params.force_magnitude
    next_state = integrate_force(state, force, params)
    failed = is_failure(next_state, params)
    return StepOutcome(next_state=next_state, reward=-1.0 if failed else 0.0, failed=failed)

