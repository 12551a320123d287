"""Snapshotting and clock rewinding for the simulation.

Every forward step of a rewindable run records a snapshot: the exact
continuous state, a copy of the eligibility traces (when traces are in use)
and the serialized random-stream state. On failure the clock is turned back
to an earlier snapshot while the learned policy tables are deliberately left
alone, so the learner keeps the experience of the failure it just avoided.

Restoring traces from the snapshot copy is the canonical path. The analytic
reversal (dividing the decay back out step by step) is implemented as well,
as a verification path and for stores that skip trace copies, but repeated
division by lambda*gamma amplifies rounding error, so it is not the default.

The live random stream is *not* rewound: after a rewind the agent must be
able to try different luck. Snapshots carry the stream state anyway so that
tests can replay a suffix bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from .rngstream import RandomStream
from typing import Sequence

import numpy as np

from .agents import trace_backward
from .cartpole import ContinuousState


@dataclass(frozen=True)
class Snapshot:
    """Complete restorable record of one time step."""

    state: ContinuousState
    rng_state: int
    traces: np.ndarray | None = None

    @property
    def time_index(self) -> int:
        return self.state.time_index


@dataclass(frozen=True)
class RewindPolicy:
    """How far back to turn the clock when a failure occurs.

    kinds: ``halfway`` (middle of the failed trial), ``fixed_back`` (k steps
    before the failure), ``full_reset`` (the trial start, i.e. plain trial
    resetting) and ``geometric`` (a random distance >= 1 with parameter p).
    With ``escalation`` on, the proposed distance doubles for every
    consecutive failure that did not get past the previous failure point.
    """

    kind: str = "halfway"
    k: int = 1
    p: float = 0.5
    escalation: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("halfway", "fixed_back", "full_reset", "geometric"):
            raise ValueError(f"unknown rewind policy kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("fixed_back distance k must be >= 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("geometric parameter p must be in (0, 1)")


@dataclass(frozen=True)
class RewindEvent:
    failure_time: int
    target_time: int
    restored_time: int
    restored_from: str  # "exact" | "nearest_earlier" | "earliest_available"
    escalation_level: int = 0

    def log_fields(self) -> dict:
        return {
            "failure_time": self.failure_time,
            "target_time": self.target_time,
            "escalation_level": self.escalation_level,
            "restored_from": self.restored_from,
        }


@dataclass
class SnapshotStore:
    """Time-ordered snapshots with optional capacity-driven thinning.

    ``capacity`` 0 means unbounded. When a record pushes the store over
    capacity, every second interior snapshot is dropped (the trial-start and
    the most recent snapshot are always kept) and the stride doubles,
    repeating until the store fits. A capacity of 1 cannot hold both pinned
    endpoints and is rejected.
    """

    capacity: int = 0
    stride: int = 1
    entries: list[Snapshot] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.capacity < 0 or self.capacity == 1:
            raise ValueError("capacity must be 0 (unbounded) or at least 2")

    def __len__(self) -> int:
        return len(self.entries)

    def times(self) -> list[int]:
        return [snap.time_index for snap in self.entries]

    def latest_time(self) -> int:
        if not self.entries:
            raise ValueError("empty snapshot store")
        return self.entries[-1].time_index

    def record(self, snap: Snapshot) -> None:
        """Append a snapshot; time indices must be strictly increasing."""
        if self.entries and snap.time_index <= self.entries[-1].time_index:
            raise ValueError(
                f"non-monotone snapshot time {snap.time_index} after {self.entries[-1].time_index}"
            )
        self.entries.append(snap)
        if self.capacity and len(self.entries) > self.capacity:
            self.thin()

    def thin(self) -> None:
        """Drop alternating interior snapshots until within capacity."""
        while self.capacity and len(self.entries) > self.capacity:
            kept = self.entries[0::2]
            if kept[-1] is not self.entries[-1]:
                kept.append(self.entries[-1])
            self.entries = kept
            self.stride *= 2

    def restore(self, target_time: int) -> tuple[Snapshot, str]:
        """Snapshot with the largest time <= target, discarding what follows.

        If the target lies before the earliest retained snapshot (possible
        only for stores that did not start at the trial start), the earliest
        one is restored and reported.
        """
        if not self.entries:
            raise ValueError("empty snapshot store")
        if target_time > self.entries[-1].time_index:
            raise ValueError(
                f"target {target_time} is after the latest stored time {self.entries[-1].time_index}"
            )
        pos = None
        for i in range(len(self.entries) - 1, -1, -1):
            if self.entries[i].time_index <= target_time:
                pos = i
                break
        if pos is None:
            snap = self.entries[0]
            self.entries = [snap]
            return snap, "earliest_available"
        snap = self.entries[pos]
        self.entries = self.entries[: pos + 1]
        return snap, "exact" if snap.time_index == target_time else "nearest_earlier"

    def reset(self, start: Snapshot) -> None:
        """Begin a fresh trial timeline from ``start``."""
        self.entries = [start]
        self.stride = 1


def escalation_level(prior_events: Sequence[RewindEvent], failure_time: int) -> int:
    """Consecutive-unsurpassed-failure count feeding the doubling rule."""
    if not prior_events:
        return 0
    last = prior_events[-1]
    return last.escalation_level + 1 if failure_time <= last.failure_time else 0


def choose_rewind_target(
    policy: RewindPolicy,
    trial_start: int,
    failure_time: int,
    prior_events: Sequence[RewindEvent],
    rng: RandomStream,
) -> int:
    """Time index to turn the clock back to after a failure.

    Always satisfies trial_start <= target < failure_time.
    """
    if failure_time <= trial_start:
        raise ValueError("failure must come after the trial start")
    if policy.kind == "full_reset":
        return trial_start
    if policy.kind == "halfway":
        base = trial_start + (failure_time - trial_start) // 2
    elif policy.kind == "fixed_back":
        base = max(trial_start, failure_time - policy.k)
    else:  # geometric
        u = rng.random()
        distance = 1 + int(math.log(1.0 - u) / math.log(1.0 - policy.p))
        base = max(trial_start, failure_time - distance)
    if policy.escalation:
        level = escalation_level(prior_events, failure_time)
        if level > 0:
            distance = (failure_time - base) * (2**level)
            base = max(trial_start, failure_time - distance)
    return base


def rewind(
    store: SnapshotStore,
    target_time: int,
    failure_time: int,
    escalation: int = 0,
) -> tuple[Snapshot, RewindEvent]:
    """Turn the clock back to ``target_time`` using the store.

    Returns the restored snapshot plus the event record. Policy tables are
    untouched by design and the live RNG stream keeps running; the caller
    re-adopts the snapshot's state (and trace copy, when present).
    """
    snap, restored_from = store.restore(target_time)
    event = RewindEvent(
        failure_time=failure_time,
        target_time=target_time,
        restored_time=snap.time_index,
        restored_from=restored_from,
        escalation_level=escalation,
    )
    return snap, event


def reverse_traces_analytic(
    traces: np.ndarray,
    visited_history: Sequence[tuple[int, int]],
    steps_back: int,
    decay: float,
) -> np.ndarray:
    """Roll a trace table back ``steps_back`` steps by inverting the decay.

    ``visited_history`` lists the (state, action) pair of every forward step
    of the current timeline, oldest first; its tail is consumed newest first.
    Returns a new table. Verification path: prefer snapshot copies, whose
    error does not grow with the distance travelled.
    """
    if steps_back < 0:
        raise ValueError("steps_back must be non-negative")
    if steps_back > len(visited_history):
        raise ValueError(
            f"cannot reverse {steps_back} steps: only {len(visited_history)} recorded"
        )
    if decay <= 0.0 and steps_back > 0:
        raise ValueError("trace reversal needs lambda*gamma > 0; restore a snapshot instead")
    result = traces.copy()
    for s, a in reversed(visited_history[len(visited_history) - steps_back :]):
        trace_backward(result, s, a, decay)
    return result
