"""Policy contract: observation bundle in, action out."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from data_store.errors import UnregisteredSkillError
from data_store.models import SkillId
from skills.character import (
    Action,
    CharacterState,
    JointId,
    ObjectState,
)
from tasks.goals import DoiGoal, GoalCondition, HsiGoal, LocoGoal

logger = logging.getLogger(__name__)

HSI_JOINTS = (JointId.PELVIS, JointId.LEFT_HAND, JointId.RIGHT_HAND)


def _to_heading(vec: np.ndarray, state: CharacterState) -> np.ndarray:
    """Express a world offset in the character heading frame (x forward)."""
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    out = np.array(vec, dtype=np.float64)
    x, y = out[..., 0].copy(), out[..., 1].copy()
    out[..., 0] = c * x + s * y
    out[..., 1] = -s * x + c * y
    return out


def encode_goal(goal: Optional[GoalCondition], state: CharacterState) -> np.ndarray:
    """Loco: 2 reals; HSI: 3 reals + joint one-hot; DOI: 24 + 3 reals; heading frame."""
    if goal is None:
        return np.zeros(0)
    if isinstance(goal, LocoGoal):
        return _to_heading(goal.target[:2] - state.root_pos[:2], state)
    if isinstance(goal, HsiGoal):
        rel = _to_heading(goal.target - state.root_pos, state)
        onehot = np.array([1.0 if goal.joint is j else 0.0 for j in HSI_JOINTS])
        return np.concatenate([rel, onehot])
    if isinstance(goal, DoiGoal):
        corners = _to_heading(goal.bbox_corners - state.root_pos, state).reshape(-1)
        target = _to_heading(goal.target - state.root_pos, state)
        return np.concatenate([corners, target])
    raise TypeError(f"unknown goal type {type(goal).__name__}")


@dataclass(frozen=True)
class Observation:
    """Everything a policy sees on one tick."""

    skill: SkillId
    state: CharacterState
    heightmap: np.ndarray
    goal: Optional[GoalCondition]
    z: np.ndarray
    objects: Dict[str, ObjectState] = field(default_factory=dict)
    phase: str = ""
    dt: float = 1.0 / 30.0

    def goal_vector(self) -> np.ndarray:
        return encode_goal(self.goal, self.state)

    def vector(self) -> np.ndarray:
        """Flat wire format: s_t, h_t (144), g_t, z."""
        return np.concatenate(
            [self.state.vector(), self.heightmap.reshape(-1), self.goal_vector(), self.z]
        )


class BasePolicy:
    """Base class for skill policies; one instance per episode."""

    skill: SkillId = SkillId.IDLE

    def act(self, obs: Observation) -> Action:
        """Choose an action for the observation."""
        raise NotImplementedError

    def advance(self, state: CharacterState, action: Action, dt: float) -> CharacterState:
        """Integrate the character one tick under the action."""
        raise NotImplementedError

    def advance_objects(
        self, objects: Dict[str, ObjectState], action: Action, dt: float
    ) -> Dict[str, ObjectState]:
        """Integrate dynamic objects; untouched by default."""
        return objects

    def contact_force(self) -> float:
        """Scalar contact-force proxy of the last tick."""
        return 0.0


PolicyFactory = Callable[[], BasePolicy]


class PolicyRegistry:
    """Skill to policy-factory map; create() hands out fresh instances."""

    def __init__(self) -> None:
        """Initialize an empty registry."""
        self._factories: Dict[SkillId, PolicyFactory] = {}

    def register(self, skill: SkillId, factory: PolicyFactory) -> None:
        """Register a factory for a skill."""
        self._factories[skill] = factory
        logger.debug(f"Registered policy for skill: {skill.value}")

    def create(self, skill: SkillId) -> BasePolicy:
        """New policy instance for a skill."""
        try:
            factory = self._factories[skill]
        except KeyError:
            raise UnregisteredSkillError(skill.value) from None
        return factory()

    def skills(self) -> list:
        return sorted(s.value for s in self._factories)

    def __contains__(self, skill: object) -> bool:
        return skill in self._factories
