"""Rewindable cart-pole reinforcement-learning laboratory.

Train tabular learners on the cart-pole failure-avoidance task, and on every
failure turn the simulation clock back to a saved pre-failure state while
keeping the learned policy, instead of resetting the trial. Includes the
benchmark harness comparing both regimes and a WebSocket control service for
human-steered runs.
"""

from .agents import ActorCriticAgent, AgentConfig, QLearningAgent, make_agent
from .cartpole import (
    Action,
    ContinuousState,
    PhysicsParams,
    StepOutcome,
    initial_state,
    is_failure,
    step,
)
from .config import ExperimentConfig, load_config
from .discretize import FAILURE, N_STATES, BinBoundaries, Discretizer, default_bounds, discretize
from .experiment import RunMetrics, compare, run_benchmark_trial, run_matrix, run_training
from .graph import TransitionGraph
from .rngstream import RandomStream
from .session import StepRecord, TrainingSession
from .timewarp import (
    RewindEvent,
    RewindPolicy,
    Snapshot,
    SnapshotStore,
    choose_rewind_target,
    reverse_traces_analytic,
    rewind,
)

__version__ = "0.1.0"
