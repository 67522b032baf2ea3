"""Character state, skill policies and the style-reward slot.

Policies live in skills.policy and skills.kinematic; import them directly.
"""

from .character import (
    HANDS,
    JOINT_ORDER,
    Action,
    CharacterState,
    JointId,
    ObjectState,
    Posture,
    make_state,
    standing_state,
)
from .style_reward import StubStyleReward, StyleRewardProvider, stub_style_reward

__all__ = [
    "HANDS",
    "JOINT_ORDER",
    "Action",
    "CharacterState",
    "JointId",
    "ObjectState",
    "Posture",
    "StubStyleReward",
    "StyleRewardProvider",
    "make_state",
    "standing_state",
    "stub_style_reward",
]
