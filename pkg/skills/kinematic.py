"""Kinematic reference primitives for every skill.

They drive the root or one joint straight at a capped speed and clamp onto the
target on arrival. Style is ignored; captions only reach the style-reward path.
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from data_store.models import SkillId
from skills.character import (
    JOINT_ORDER,
    POSTURE_CODES,
    Action,
    CharacterState,
    JointId,
    ObjectState,
    Posture,
    make_state,
    wrap_angle,
    yaw_quaternion,
)
from skills.policy import BasePolicy, Observation, PolicyRegistry
from tasks.config import EpisodeConfig
from tasks.goals import DoiGoal, HsiGoal, LocoGoal
from tasks.rewards import contact_point

logger = logging.getLogger(__name__)

ARRIVAL_EPS = 1e-9
MAX_TURN_RATE = math.pi
APPROACH_RADIUS = 0.5
APPROACH_STANDOFF = 0.45
CARRY_STANDOFF = 0.35

_CODE_TO_POSTURE = {code: posture for posture, code in POSTURE_CODES.items()}


def _step_toward(
    current: np.ndarray, target: np.ndarray, max_step: float
) -> Tuple[np.ndarray, bool]:
    """Move at most max_step toward target; snap exactly when within reach."""
    diff = target - current
    dist = float(np.linalg.norm(diff))
    if dist <= max_step + ARRIVAL_EPS:
        return np.array(target, dtype=np.float64), True
    return current + diff * (max_step / dist), False


def _turn_toward(yaw: float, desired: float, dt: float) -> float:
    delta = wrap_angle(desired - yaw)
    cap = MAX_TURN_RATE * dt
    return wrap_angle(yaw + max(-cap, min(cap, delta)))


def walk_toward(
    state: CharacterState, target_xy: np.ndarray, speed: float, dt: float
) -> CharacterState:
    """Standing walk of the root toward a ground point."""
    root_xy = state.root_pos[:2]
    target = np.asarray(target_xy, dtype=np.float64)[:2]
    new_xy, _ = _step_toward(root_xy, target, speed * dt)
    diff = target - root_xy
    yaw = state.yaw
    if float(np.hypot(diff[0], diff[1])) > ARRIVAL_EPS:
        yaw = _turn_toward(yaw, math.atan2(diff[1], diff[0]), dt)
    root = np.array([new_xy[0], new_xy[1], state.root_pos[2]])
    return make_state(root, (root - state.root_pos) / dt, yaw, Posture.STANDING)


def kinematic_walk(state: CharacterState, goal: LocoGoal, dt: float) -> CharacterState:
    """Walk toward a locomotion goal at its target speed."""
    return walk_toward(state, goal.target, goal.target_speed, dt)


def kinematic_idle(state: CharacterState, dt: float) -> CharacterState:
    """Stand still in the current posture."""
    return make_state(state.root_pos, np.zeros(3), state.yaw, state.posture)


_CONTACT_POSTURE = {SkillId.SIT: Posture.SEATED, SkillId.LIE: Posture.LYING}


def kinematic_contact(
    state: CharacterState,
    goal: HsiGoal,
    dt: float,
    skill: SkillId,
    speed: float = 1.0,
) -> CharacterState:
    """Drive the constrained joint onto its contact (or standing) target."""
    joint = goal.joint
    current = state.joint(joint)
    if skill is SkillId.GETUP:
        if goal.standing_target is None:
            raise ValueError("getup goal has no standing target")
        target = goal.standing_target
    else:
        target = contact_point(goal, current)
    new_pos, arrived = _step_toward(current, target, speed * dt)

    if joint is JointId.PELVIS:
        posture = _CONTACT_POSTURE.get(skill, state.posture)
        if skill is SkillId.GETUP and arrived:
            posture = Posture.STANDING
        return make_state(new_pos, (new_pos - state.root_pos) / dt, state.yaw, posture)

    overrides = {j: state.joint(j) for j in JOINT_ORDER if j is not JointId.PELVIS}
    overrides[joint] = new_pos
    return make_state(state.root_pos, np.zeros(3), state.yaw, state.posture, overrides)


def _carry_direction(obj_root: np.ndarray, goal: DoiGoal, fallback: np.ndarray) -> np.ndarray:
    diff = goal.target[:2] - obj_root[:2]
    norm = float(np.hypot(diff[0], diff[1]))
    if norm <= ARRIVAL_EPS:
        return fallback[:2]
    return diff / norm


def _hands_on_object(obj_root: np.ndarray, heading: np.ndarray, half_width: float) -> Dict[JointId, np.ndarray]:
    side = np.array([-heading[1], heading[0], 0.0]) * half_width
    return {JointId.LEFT_HAND: obj_root + side, JointId.RIGHT_HAND: obj_root - side}


def kinematic_carry(
    state: CharacterState,
    obj_state: ObjectState,
    goal: DoiGoal,
    dt: float,
    speed: float = 1.5,
    release_radius: float = 0.2,
    half_width: float = 0.15,
    standing_height: float = 0.9,
) -> Tuple[CharacterState, ObjectState]:
    """Walk to the object, carry it rigidly to the goal, release it there."""
    obj_root = np.asarray(obj_state.root, dtype=np.float64)
    if not obj_state.held:
        if float(np.linalg.norm(goal.target - obj_root)) <= release_radius:
            return kinematic_idle(state, dt), ObjectState(obj_root.copy(), np.zeros(3), False)
        heading = _carry_direction(obj_root, goal, state.facing)
        approach = obj_root[:2] - CARRY_STANDOFF * heading
        moved = walk_toward(state, approach, speed, dt)
        attached = float(np.hypot(*(moved.root_pos[:2] - approach))) <= ARRIVAL_EPS
        return moved, ObjectState(obj_root.copy(), np.zeros(3), attached)

    heading = _carry_direction(obj_root, goal, state.facing)
    new_obj, arrived = _step_toward(obj_root, goal.target, speed * dt)
    obj_vel = (new_obj - obj_root) / dt
    root = np.array(
        [
            new_obj[0] - CARRY_STANDOFF * heading[0],
            new_obj[1] - CARRY_STANDOFF * heading[1],
            standing_height,
        ]
    )
    yaw = math.atan2(heading[1], heading[0])
    hands = _hands_on_object(new_obj, heading, half_width)
    char = make_state(root, (root - state.root_pos) / dt, yaw, Posture.STANDING, hands)
    return char, ObjectState(new_obj, obj_vel, not arrived)


# Kinematic actions are target poses: joints, yaw, posture, then carried object.


def encode_pose(
    state: CharacterState, obj: Optional[ObjectState] = None
) -> Action:
    """Pack a target pose (and optionally an object state) into an action."""
    joints = np.concatenate([state.joint(j) for j in JOINT_ORDER])
    tail = np.zeros(4) if obj is None else np.concatenate([[1.0 if obj.held else 0.5], obj.root])
    return Action(np.concatenate([joints, [state.yaw, POSTURE_CODES[state.posture]], tail]))


def decode_pose(prev: CharacterState, action: Action, dt: float) -> CharacterState:
    """Unpack the character part of a kinematic action."""
    values = action.values
    n = len(JOINT_ORDER) * 3
    joints = {j: values[3 * i : 3 * i + 3].copy() for i, j in enumerate(JOINT_ORDER)}
    yaw = float(values[n])
    posture = _CODE_TO_POSTURE[float(values[n + 1])]
    root = joints[JointId.PELVIS].copy()
    quat = yaw_quaternion(yaw)
    return CharacterState(
        root_pos=root,
        root_vel=(root - prev.root_pos) / dt,
        yaw=wrap_angle(yaw),
        joints=joints,
        joint_rotations={j: quat.copy() for j in JOINT_ORDER},
        posture=posture,
    )


class KinematicPolicy(BasePolicy):
    """Shared plumbing: act computes the next pose, advance applies it."""

    def __init__(self, skill: SkillId, cfg: EpisodeConfig):
        """Initialize the policy for one skill."""
        self.skill = skill
        self.cfg = cfg
        self._object_id: Optional[str] = None
        self._object_prev: Optional[ObjectState] = None

    def advance(self, state: CharacterState, action: Action, dt: float) -> CharacterState:
        """Apply the target pose."""
        return decode_pose(state, action, dt)


class KinematicLocoPolicy(KinematicPolicy):
    """Walk toward the target, or idle in place."""

    def act(self, obs: Observation) -> Action:
        """Next pose for Walk or Idle."""
        if self.skill is SkillId.IDLE or not isinstance(obs.goal, LocoGoal):
            return encode_pose(kinematic_idle(obs.state, obs.dt))
        return encode_pose(kinematic_walk(obs.state, obs.goal, obs.dt))


class KinematicHsiPolicy(KinematicPolicy):
    """Approach on foot, then drive the joint onto the part."""

    def act(self, obs: Observation) -> Action:
        """Next pose for Sit, Lie, Reach or GetUp."""
        goal = obs.goal
        if not isinstance(goal, HsiGoal):
            return encode_pose(kinematic_idle(obs.state, obs.dt))
        state = obs.state
        if self.skill is not SkillId.GETUP and state.posture is Posture.STANDING:
            diff = goal.target[:2] - state.root_pos[:2]
            dist = float(np.hypot(diff[0], diff[1]))
            if dist > APPROACH_RADIUS:
                standoff = goal.target[:2] - diff / dist * APPROACH_STANDOFF
                return encode_pose(
                    walk_toward(state, standoff, goal.target_speed, obs.dt)
                )
        return encode_pose(
            kinematic_contact(state, goal, obs.dt, self.skill, self.cfg.contact_speed)
        )


class KinematicCarryPolicy(KinematicPolicy):
    """Walk to a dynamic object and carry it to the goal."""

    def act(self, obs: Observation) -> Action:
        """Next pose of the character and the carried object."""
        goal = obs.goal
        if not isinstance(goal, DoiGoal):
            return encode_pose(kinematic_idle(obs.state, obs.dt))
        obj = obs.objects[goal.object_id]
        extent = goal.bbox_corners.max(axis=0) - goal.bbox_corners.min(axis=0)
        char, new_obj = kinematic_carry(
            obs.state,
            obj,
            goal,
            obs.dt,
            speed=self.cfg.carry_speed,
            release_radius=self.cfg.thresholds.carry,
            half_width=float(max(extent[0], extent[1]) / 2.0),
            standing_height=self.cfg.standing_height,
        )
        self._object_id = goal.object_id
        self._object_prev = obj
        return encode_pose(char, new_obj)

    def advance_objects(
        self, objects: Dict[str, ObjectState], action: Action, dt: float
    ) -> Dict[str, ObjectState]:
        """Move the carried object to the pose packed in the action."""
        if self._object_id is None or self._object_prev is None:
            return objects
        tail = action.values[-4:]
        root = tail[1:].copy()
        updated = dict(objects)
        updated[self._object_id] = ObjectState(
            root, (root - self._object_prev.root) / dt, bool(tail[0] == 1.0)
        )
        return updated


def build_kinematic_registry(cfg: EpisodeConfig) -> PolicyRegistry:
    """Registry with a kinematic primitive for each of the seven skills."""
    registry = PolicyRegistry()
    for skill in (SkillId.WALK, SkillId.IDLE):
        registry.register(skill, lambda s=skill: KinematicLocoPolicy(s, cfg))
    for skill in (SkillId.SIT, SkillId.LIE, SkillId.REACH, SkillId.GETUP):
        registry.register(skill, lambda s=skill: KinematicHsiPolicy(s, cfg))
    registry.register(SkillId.CARRY, lambda: KinematicCarryPolicy(SkillId.CARRY, cfg))
    return registry
