"""Episode finite-state machine, traces and the parallel episode runner."""

from .executor import (
    check_completion,
    check_termination,
    init_episode,
    run_episode,
    tick,
)
from .runner import default_workers, run_episodes
from .seeding import derive_rng, episode_seeds
from .state import (
    ExecutionTrace,
    FsmState,
    KeyframeOutcome,
    TerminationReason,
    TickRecord,
    load_trace,
    save_trace,
)

__all__ = [
    "ExecutionTrace",
    "FsmState",
    "KeyframeOutcome",
    "TerminationReason",
    "TickRecord",
    "check_completion",
    "check_termination",
    "default_workers",
    "derive_rng",
    "episode_seeds",
    "init_episode",
    "load_trace",
    "run_episode",
    "run_episodes",
    "save_trace",
    "tick",
]
