"""Tabular learners: Q-learning and actor-critic, with eligibility traces.

Traces use the accumulating form: every entry decays by lambda*gamma each
step and the visited (state, action) entry then gains 1. That update has an
exact algebraic inverse (divide back out, subtracting the 1 from the visited
entry), which is what makes the simulation clock reversible for trace-based
learners; see :mod:`rewindrl.timewarp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from .rngstream import RandomStream

import numpy as np

from .cartpole import Action
from .discretize import FAILURE, N_STATES

N_ACTIONS = 2


@dataclass(frozen=True)
class AgentConfig:
    """Learner hyperparameters.

    ``alpha_schedule`` is ``constant`` or ``visit_count`` (alpha divided by
    the visit count of the updated pair). ``epsilon_decay`` is ``constant``
    or ``linear`` (toward ``epsilon_final`` over the training budget).
    ``actor_alpha``/``critic_alpha`` default to ``alpha`` when unset.
    """

    alpha: float = 0.1
    alpha_schedule: str = "constant"
    gamma: float = 0.95
    lam: float = 0.8
    epsilon: float = 0.2
    epsilon_final: float = 0.01
    epsilon_decay: str = "linear"
    selection: str = "epsilon_greedy"
    temperature: float = 1.0
    traces_enabled: bool = True
    actor_alpha: float | None = None
    critic_alpha: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lambda must be in [0, 1), got {self.lam}")
        for name in ("epsilon", "epsilon_final"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.alpha_schedule not in ("constant", "visit_count"):
            raise ValueError(f"unknown alpha_schedule {self.alpha_schedule!r}")
        if self.epsilon_decay not in ("constant", "linear"):
            raise ValueError(f"unknown epsilon_decay {self.epsilon_decay!r}")
        if self.selection not in ("epsilon_greedy", "boltzmann"):
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")

    @property
    def trace_decay(self) -> float:
        return self.lam * self.gamma

    def effective_epsilon(self, progress: float = 0.0) -> float:
        """Exploration rate at ``progress`` in [0, 1] through the budget."""
        if self.epsilon_decay == "constant":
            return self.epsilon
        p = min(max(progress, 0.0), 1.0)
        return self.epsilon + (self.epsilon_final - self.epsilon) * p


def new_trace_table(n_states: int = N_STATES) -> np.ndarray:
    return np.zeros((n_states, N_ACTIONS))


def trace_forward(traces: np.ndarray, s: int, a: int, decay: float) -> np.ndarray:
    """Decay every trace by ``decay`` then bump the visited entry (in place)."""
    traces *= decay
    traces[s, a] += 1.0
    return traces


def trace_backward(traces: np.ndarray, s: int, a: int, decay: float) -> np.ndarray:
    """Exact inverse of :func:`trace_forward` (in place).

    Undefined for ``decay == 0``; callers without a positive decay must
    restore traces from a snapshot instead.
    """
    if decay <= 0.0:
        raise ValueError("trace reversal needs lambda*gamma > 0; restore a snapshot instead")
    traces[s, a] -= 1.0
    traces /= decay
    return traces


def greedy_index(values) -> int:
    """Argmax over the two actions, ties resolved to PUSH_LEFT."""
    return 1 if values[1] > values[0] else 0


def epsilon_greedy(values, epsilon: float, rng: RandomStream) -> int:
    if epsilon > 0.0 and rng.random() < epsilon:
        return rng.randrange(N_ACTIONS)
    return greedy_index(values)


def boltzmann(values, temperature: float, rng: RandomStream) -> int:
    """Sample an action index with probability softmax(values / temperature)."""
    scaled0 = values[0] / temperature
    scaled1 = values[1] / temperature
    peak = scaled0 if scaled0 > scaled1 else scaled1
    w0 = math.exp(scaled0 - peak)
    w1 = math.exp(scaled1 - peak)
    return 0 if rng.random() * (w0 + w1) < w0 else 1


class QLearningAgent:
    """Lookup-table Q-learning, optionally with accumulating traces."""

    kind = "q_learning"

    def __init__(self, config: AgentConfig, n_states: int = N_STATES):
        self.config = config
        self.q = np.zeros((n_states, N_ACTIONS))
        self.traces = new_trace_table(n_states) if config.traces_enabled else None
        self._visits = (
            np.zeros((n_states, N_ACTIONS), dtype=np.int64)
            if config.alpha_schedule == "visit_count"
            else None
        )

    def select_action(self, s: int, rng: RandomStream, progress: float = 0.0) -> Action:
        cfg = self.config
        if cfg.selection == "boltzmann":
            return Action(boltzmann(self.q[s], cfg.temperature, rng))
        return Action(epsilon_greedy(self.q[s], cfg.effective_epsilon(progress), rng))

    def greedy_action(self, s: int) -> Action:
        return Action(greedy_index(self.q[s]))

    def _alpha(self, s: int, a: int) -> float:
        if self._visits is None:
            return self.config.alpha
        self._visits[s, a] += 1
        return self.config.alpha / float(self._visits[s, a])

    def update(self, s: int, a: int, reward: float, s_next: int) -> None:
        """One temporal-difference backup; ``s_next`` may be FAILURE."""
        q = self.q
        if s_next == FAILURE:
            target = reward
        else:
            row = q[s_next]
            target = reward + self.config.gamma * (row[0] if row[0] > row[1] else row[1])
        delta = target - q[s, a]
        alpha = self._alpha(s, a)
        if self.traces is None:
            q[s, a] += alpha * delta
        else:
            trace_forward(self.traces, s, a, self.config.trace_decay)
            q += (alpha * delta) * self.traces

    def values_row(self, s: int) -> list[float]:
        return [float(v) for v in self.q[s]]

    def policy_table(self) -> np.ndarray:
        return self.q

    def learned_tables(self) -> tuple[np.ndarray, ...]:
        """Every table a rewind must leave untouched."""
        return (self.q,)

    def reset_traces(self) -> None:
        if self.traces is not None:
            self.traces.fill(0.0)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "q": self.q.tolist()}


class ActorCriticAgent:
    """TD actor-critic with separate state values and action preferences.

    Action selection is Boltzmann over the preferences; the critic's TD
    error drives both tables.
    """

    kind = "actor_critic"

    def __init__(self, config: AgentConfig, n_states: int = N_STATES):
        self.config = config
        self.critic = np.zeros(n_states)
        self.preferences = np.zeros((n_states, N_ACTIONS))
        self.traces = None  # traces are a Q-learning option only

    def select_action(self, s: int, rng: RandomStream, progress: float = 0.0) -> Action:
        return Action(boltzmann(self.preferences[s], self.config.temperature, rng))

    def greedy_action(self, s: int) -> Action:
        return Action(greedy_index(self.preferences[s]))

    def update(self, s: int, a: int, reward: float, s_next: int) -> None:
        cfg = self.config
        v_next = 0.0 if s_next == FAILURE else self.critic[s_next]
        delta = reward + cfg.gamma * v_next - self.critic[s]
        critic_alpha = cfg.critic_alpha if cfg.critic_alpha is not None else cfg.alpha
        actor_alpha = cfg.actor_alpha if cfg.actor_alpha is not None else cfg.alpha
        self.critic[s] += critic_alpha * delta
        self.preferences[s, a] += actor_alpha * delta

    def values_row(self, s: int) -> list[float]:
        return [float(v) for v in self.preferences[s]]

    def policy_table(self) -> np.ndarray:
        return self.preferences

    def learned_tables(self) -> tuple[np.ndarray, ...]:
        return (self.critic, self.preferences)

    def reset_traces(self) -> None:
        pass

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "critic": self.critic.tolist(),
            "preferences": self.preferences.tolist(),
        }


Agent = QLearningAgent | ActorCriticAgent


def make_agent(algorithm: str, config: AgentConfig, n_states: int = N_STATES) -> Agent:
    if algorithm == "q_learning":
        return QLearningAgent(config, n_states)
    if algorithm == "actor_critic":
        return ActorCriticAgent(config, n_states)
    raise ValueError(f"unknown algorithm {algorithm!r}")
