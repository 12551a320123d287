"""One live training run: environment, learner, snapshots, failure handling.

Both experiment variants and the interactive control service drive the same
``TrainingSession``. The learner only ever sees (s, a, r, s') tuples, so a
rewound timeline is indistinguishable from ordinary forward time to it; the
session does all clock manipulation on the outside. Manual rewinds (from the
control panel) go through the exact same restoration path as automatic
failure handling.

A restoration that lands on the trial start is a trial reset: it is counted
as a new trial, not as a rewind, which makes the full-reset policy behave
identically to the plain trial-resetting algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from .agents import make_agent
from .cartpole import Action, ContinuousState, initial_state, step
from .config import ExperimentConfig
from .discretize import FAILURE, Discretizer
from .graph import TransitionGraph
from .rngstream import RandomStream
from .timewarp import (
    RewindEvent,
    Snapshot,
    SnapshotStore,
    choose_rewind_target,
    escalation_level,
    reverse_traces_analytic,
    rewind,
)


@dataclass(frozen=True)
class StepRecord:
    """Everything observable about one forward step (post failure-handling)."""

    state_before: ContinuousState
    action: Action
    reward: float
    outcome_state: ContinuousState
    failed: bool
    rewind_event: RewindEvent | None
    time_index: int
    trial: int
    discrete_id: int


class TrainingSession:
    def __init__(
        self,
        config: ExperimentConfig,
        seed: int,
        budget: int | None = None,
        timewarp_enabled: bool | None = None,
        keep_store: bool = False,
        pre_rewind: Callable[["TrainingSession"], None] | None = None,
    ):
        self.config = config
        self.seed = seed
        self.budget = budget
        self.timewarp_enabled = (
            config.timewarp_enabled if timewarp_enabled is None else timewarp_enabled
        )
        self.rewind_policy = config.rewind_policy
        self.rng = RandomStream(seed)
        self.agent = make_agent(config.algorithm, config.agent)
        self.discretizer = Discretizer(config.bounds, config.physics)
        self.graph = TransitionGraph()
        self.store: SnapshotStore | None = (
            SnapshotStore(capacity=config.snapshot_capacity)
            if self.timewarp_enabled or keep_store
            else None
        )
        self.pre_rewind = pre_rewind

        self.state = initial_state()
        self.current_id = self.discretizer(self.state)
        self.steps_taken = 0
        self.trial = 1
        self.best_steps = 0
        self.rewind_count = 0
        self.last_reward = 0.0
        self.rewind_events: list[RewindEvent] = []
        self._trial_events: list[RewindEvent] = []
        self._visited_history: list[tuple[int, int]] = []
        if self.store is not None:
            self.store.reset(self._snapshot())

    # -- snapshotting ------------------------------------------------------

    def _snapshot(self) -> Snapshot:
        traces = self.agent.traces
        return Snapshot(
            state=self.state,
            rng_state=self.rng.getstate(),
            traces=None if traces is None or not self.config.snapshot_traces else traces.copy(),
        )

    # -- the forward step --------------------------------------------------

    def step_once(self) -> StepRecord:
        """One forward simulation step, learning update and failure handling."""
        progress = self.steps_taken / self.budget if self.budget else 0.0
        state_before = self.state
        s = self.current_id
        action = self.agent.select_action(s, self.rng, progress)
        outcome = step(state_before, action, self.config.physics)
        self.steps_taken += 1
        self.last_reward = outcome.reward

        s_next = FAILURE if outcome.failed else self.discretizer(outcome.next_state)
        self.graph.record_transition(s, s_next)
        self.agent.update(s, action, outcome.reward, s_next)
        if self.agent.traces is not None:
            self._visited_history.append((s, int(action)))
        if outcome.next_state.time_index > self.best_steps:
            self.best_steps = outcome.next_state.time_index

        event: RewindEvent | None = None
        if outcome.failed:
            if self.timewarp_enabled:
                event = self._rewind_after_failure(outcome.next_state.time_index)
            else:
                self._reset_trial()
        else:
            self.state = outcome.next_state
            self.current_id = s_next
            if self.store is not None:
                self.store.record(self._snapshot())

        return StepRecord(
            state_before=state_before,
            action=action,
            reward=outcome.reward,
            outcome_state=outcome.next_state,
            failed=outcome.failed,
            rewind_event=event,
            time_index=self.state.time_index,
            trial=self.trial,
            discrete_id=self.current_id,
        )

    # -- failure handling ----------------------------------------------------

    def _reset_trial(self) -> None:
        self.trial += 1
        self.state = initial_state()
        self.current_id = self.discretizer(self.state)
        self.agent.reset_traces()
        self._visited_history.clear()
        self._trial_events.clear()
        if self.store is not None:
            self.store.reset(self._snapshot())

    def _rewind_after_failure(self, failure_time: int) -> RewindEvent:
        target = choose_rewind_target(
            self.rewind_policy, 0, failure_time, self._trial_events, self.rng
        )
        level = (
            escalation_level(self._trial_events, failure_time)
            if self.rewind_policy.escalation
            else 0
        )
        return self._restore(target, failure_time, level)

    def _restore(self, target: int, failure_time: int, level: int = 0) -> RewindEvent:
        assert self.store is not None
        if self.pre_rewind is not None:
            self.pre_rewind(self)
        snap, event = rewind(self.store, target, failure_time, level)
        self.state = snap.state
        self.current_id = self.discretizer(snap.state)
        self._restore_traces(snap)
        self.rewind_events.append(event)
        if snap.time_index == 0:
            # landing on the trial start is a reset, not a rewind
            self.trial += 1
            self._trial_events.clear()
        else:
            self.rewind_count += 1
            self._trial_events.append(event)
        return event

    def _restore_traces(self, snap: Snapshot) -> None:
        traces = self.agent.traces
        if traces is None:
            return
        if snap.traces is not None:
            traces[:] = snap.traces
        else:
            # store configured without trace copies: invert the decay instead
            steps_back = len(self._visited_history) - snap.time_index
            traces[:] = reverse_traces_analytic(
                traces, self._visited_history, steps_back, self.config.agent.trace_decay
            )
        del self._visited_history[snap.time_index :]

    # -- manual control (the service's surface) -----------------------------

    def manual_rewind(
        self,
        target_time: int | None = None,
        steps_back: int | None = None,
        restore_rng: bool = False,
    ) -> RewindEvent:
        """Operator-initiated rewind; same restoration path as failures."""
        if self.store is None:
            raise ValueError("this session keeps no snapshots")
        now = self.state.time_index
        if (target_time is None) == (steps_back is None):
            raise ValueError("give exactly one of target_time or steps_back")
        if steps_back is not None:
            if steps_back < 1:
                raise ValueError("steps_back must be >= 1")
            target_time = max(0, now - steps_back)
        assert target_time is not None
        if target_time >= now:
            raise ValueError(f"target {target_time} is not before the current time {now}")
        if target_time < 0:
            raise ValueError("target_time must be >= 0")
        event = self._restore(target_time, failure_time=now)
        if restore_rng:
            # test-only: replaying from here reproduces the timeline bit for bit
            self.rng.setstate(self.store.entries[-1].rng_state)
        return event

    def manual_reset(self) -> None:
        self._reset_trial()

    def set_param(self, name: str, value) -> None:
        """Runtime-tunable parameters; anything else is rejected."""
        if name == "epsilon":
            self.agent.config = replace(self.agent.config, epsilon=float(value))
        elif name == "temperature":
            self.agent.config = replace(self.agent.config, temperature=float(value))
        elif name == "alpha":
            self.agent.config = replace(self.agent.config, alpha=float(value))
        elif name == "rewind_kind":
            self.rewind_policy = replace(self.rewind_policy, kind=str(value))
        elif name == "rewind_k":
            self.rewind_policy = replace(self.rewind_policy, k=int(value))
        elif name == "rewind_p":
            self.rewind_policy = replace(self.rewind_policy, p=float(value))
        elif name == "rewind_escalation":
            self.rewind_policy = replace(self.rewind_policy, escalation=bool(value))
        else:
            raise ValueError(f"parameter {name!r} is not runtime-tunable")

    # -- reporting -----------------------------------------------------------

    def snapshot_times(self) -> list[int]:
        return self.store.times() if self.store is not None else []

    def unique_states(self) -> int:
        return self.graph.unique_state_count()
