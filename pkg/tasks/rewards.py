"""Task rewards for locomotion, idling, scene interaction, getting up and carrying."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np

from data_store.errors import RewardRangeError
from scene.geometry import nearest_surface_point
from skills.character import HANDS, CharacterState, ObjectState
from tasks.config import EpisodeConfig
from tasks.goals import DoiGoal, HsiGoal, LocoGoal

BRANCH_RADIUS_SQ = 0.5
RANGE_TOLERANCE = 1e-9


class GetUpPhase(str, Enum):
    SEATED = "seated"
    RISING = "rising"


@dataclass(frozen=True)
class RewardBreakdown:
    """Total task reward with its named terms and the branch taken."""

    total: float
    terms: Dict[str, float] = field(default_factory=dict)
    branch: str = "near"

    def to_dict(self) -> Dict[str, object]:
        return {"total": self.total, "terms": dict(self.terms), "branch": self.branch}


def _sq(v: np.ndarray) -> float:
    return float(np.dot(v, v))


def _unit_or(direction: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norm = math.sqrt(_sq(direction))
    if norm == 0.0:
        return fallback
    return direction / norm


def _far_walk_terms(
    d2: float, d_star: np.ndarray, vel: np.ndarray, facing: np.ndarray, speed: float
) -> float:
    pos = math.exp(-0.5 * d2)
    vel_err = speed - float(np.dot(d_star, vel))
    heading = float(np.dot(d_star, facing)) ** 2
    return 0.6 * pos + 0.2 * math.exp(-2.0 * vel_err * vel_err) + 0.2 * heading


def loco_reward(
    state: CharacterState, prev_state: CharacterState, goal: LocoGoal
) -> RewardBreakdown:
    """Walk reward on ground-plane positions; branch on the squared distance."""
    diff = goal.target[:2] - state.root_pos[:2]
    d2 = _sq(diff)
    facing = state.facing[:2]
    d_star = _unit_or(diff, facing)
    vel = state.root_vel[:2]
    r_far = _far_walk_terms(d2, d_star, vel, facing, goal.target_speed)
    r_near = math.exp(-10.0 * d2)
    r_still = math.exp(-2.0 * _sq(vel - prev_state.root_vel[:2]))
    terms = {"far": r_far, "near": r_near, "still": r_still}
    if d2 > BRANCH_RADIUS_SQ:
        return RewardBreakdown(0.4 * r_near + 0.5 * r_far, terms, "far")
    return RewardBreakdown(0.4 * r_near + 0.5 + 0.1 * r_still, terms, "near")


def idle_reward(
    state: CharacterState,
    prev_state: CharacterState,
    goal: LocoGoal,
    radius: float = 3.0,
) -> RewardBreakdown:
    """Loco reward with the anchor distance clamped to max(0, d - radius)."""
    diff = goal.target[:2] - state.root_pos[:2]
    excess = max(0.0, math.sqrt(_sq(diff)) - radius)
    d2 = excess * excess
    facing = state.facing[:2]
    d_star = _unit_or(diff, facing)
    vel = state.root_vel[:2]
    r_far = _far_walk_terms(d2, d_star, vel, facing, 0.0)
    r_near = math.exp(-10.0 * d2)
    r_still = math.exp(-2.0 * _sq(vel - prev_state.root_vel[:2]))
    terms = {"far": r_far, "near": r_near, "still": r_still}
    if d2 > BRANCH_RADIUS_SQ:
        return RewardBreakdown(0.4 * r_near + 0.5 * r_far, terms, "far")
    return RewardBreakdown(0.4 * r_near + 0.5 + 0.1 * r_still, terms, "near")


def contact_point(goal: HsiGoal, joint_pos: Sequence[float]) -> np.ndarray:
    """Part point nearest the constrained joint, re-queried every tick."""
    point, _ = nearest_surface_point(goal.part_points, joint_pos)
    return point


def hsi_reward(
    state: CharacterState,
    joint_pos: Sequence[float],
    goal: HsiGoal,
    contact: Optional[np.ndarray] = None,
) -> RewardBreakdown:
    """Approach-then-contact reward for Sit, Lie and Reach."""
    joint = np.asarray(joint_pos, dtype=np.float64)
    diff = goal.target[:2] - state.root_pos[:2]
    d2 = _sq(diff)
    d_star = _unit_or(diff, state.facing[:2])
    vel_err = goal.target_speed - float(np.dot(d_star, state.root_vel[:2]))
    r_far = math.exp(-2.0 * vel_err * vel_err)
    x_contact = contact_point(goal, joint) if contact is None else contact
    r_near = math.exp(-10.0 * _sq(x_contact - joint))
    terms = {"far": r_far, "near": r_near}
    if d2 > BRANCH_RADIUS_SQ:
        return RewardBreakdown(0.7 * r_near + 0.3 * r_far, terms, "far")
    return RewardBreakdown(0.7 * r_near + 0.3, terms, "near")


def getup_reward(
    state: CharacterState,
    joint_pos: Sequence[float],
    goal: HsiGoal,
    phase: GetUpPhase,
) -> RewardBreakdown:
    """Seated: contact reward on the seat; Rising: near term toward the standing target."""
    if phase is GetUpPhase.SEATED:
        return hsi_reward(state, joint_pos, goal)
    if goal.standing_target is None:
        raise ValueError("getup goal has no standing target")
    joint = np.asarray(joint_pos, dtype=np.float64)
    r_near = math.exp(-10.0 * _sq(goal.standing_target - joint))
    return RewardBreakdown(0.7 * r_near + 0.3, {"near": r_near}, "near")


def goal_velocity(obj_root: np.ndarray, goal: DoiGoal, arrive_radius: float) -> np.ndarray:
    """Desired object velocity: target speed toward the goal, zero once arrived."""
    diff = goal.target - obj_root
    dist = math.sqrt(_sq(diff))
    if dist <= arrive_radius:
        return np.zeros(3)
    return goal.target_speed * diff / dist


def nearest_hand_position(state: CharacterState, point: np.ndarray) -> np.ndarray:
    """Position of the hand closer to a point; ties go to the left hand."""
    best = state.joint(HANDS[0])
    for hand in HANDS[1:]:
        candidate = state.joint(hand)
        if _sq(candidate - point) < _sq(best - point):
            best = candidate
    return best


def doi_reward(
    state: CharacterState,
    hand_pos: Optional[Sequence[float]],
    obj_state: ObjectState,
    goal: DoiGoal,
    arrive_radius: float = 0.2,
) -> RewardBreakdown:
    """Walk-to-object, hand-on-object and object-to-goal reward."""
    x_obj = np.asarray(obj_state.root, dtype=np.float64)
    if hand_pos is None:
        hand = nearest_hand_position(state, x_obj)
    else:
        hand = np.asarray(hand_pos, dtype=np.float64)
    v_goal = goal_velocity(x_obj, goal, arrive_radius)
    obj_vel = np.asarray(obj_state.vel, dtype=np.float64)
    r_walk = 0.8 * math.exp(-10.0 * _sq(state.root_pos[:2] - x_obj[:2]))
    r_walk += 0.2 * math.exp(-2.0 * _sq(state.root_vel - v_goal))
    r_hand = math.exp(-0.5 * _sq(hand - x_obj))
    r_carry = 0.7 * math.exp(-10.0 * _sq(x_obj - goal.target))
    r_carry += 0.3 * math.exp(-2.0 * _sq(obj_vel - v_goal))
    terms = {"walk": r_walk, "hand": r_hand, "carry": r_carry}
    if _sq(x_obj - goal.target) > BRANCH_RADIUS_SQ:
        return RewardBreakdown(0.3 * r_walk + 0.5 * r_carry + 0.2 * r_hand, terms, "far")
    return RewardBreakdown(0.3 * r_walk + 0.5 * r_carry + 0.2, terms, "near")


def combine(style_r: float, task_r: float, cfg: EpisodeConfig) -> float:
    """Weighted sum of style and task rewards."""
    for name, value in (("style", style_r), ("task", task_r)):
        if not (-RANGE_TOLERANCE <= value <= 1.0 + RANGE_TOLERANCE) or math.isnan(value):
            raise RewardRangeError(f"{name} reward {value} outside [0, 1]")
    return cfg.lambda_style * style_r + cfg.lambda_task * task_r


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    """Sum of gamma^t * r_t."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    total = 0.0
    weight = 1.0
    for r in rewards:
        total += weight * r
        weight *= gamma
    return total
