"""Goal construction, task rewards and episode configuration."""

from .config import EpisodeConfig, Thresholds, load_episode_config
from .goals import (
    DoiGoal,
    GoalCondition,
    HsiGoal,
    LocoGoal,
    make_approach_goal,
    make_doi_goal,
    make_getup_goal,
    make_hsi_goal,
    make_loco_goal,
)
from .rewards import (
    GetUpPhase,
    RewardBreakdown,
    combine,
    discounted_return,
    doi_reward,
    getup_reward,
    hsi_reward,
    idle_reward,
    loco_reward,
)

__all__ = [
    "DoiGoal",
    "EpisodeConfig",
    "GetUpPhase",
    "GoalCondition",
    "HsiGoal",
    "LocoGoal",
    "RewardBreakdown",
    "Thresholds",
    "combine",
    "discounted_return",
    "doi_reward",
    "getup_reward",
    "hsi_reward",
    "idle_reward",
    "load_episode_config",
    "loco_reward",
    "make_approach_goal",
    "make_doi_goal",
    "make_getup_goal",
    "make_hsi_goal",
    "make_loco_goal",
]
