"""Goal conditions for the locomotion, scene-interaction and carry templates."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from data_store.errors import InfeasibleGoalError
from data_store.models import SkillId
from scene.geometry import Aabb, nearest_surface_point
from scene.scene import Scene
from skills.character import HANDS, CharacterState, JointId

logger = logging.getLogger(__name__)

WALK_MIN_DISTANCE = 1.0
DEFAULT_SPEED = 1.5
SAMPLE_ATTEMPTS = 10_000
OPEN_AREA_HALF_EXTENT = 5.0

PART_PREFERENCES = {
    SkillId.SIT: ("seat", "top", "surface"),
    SkillId.LIE: ("bed", "top", "surface"),
    SkillId.REACH: ("front", "surface"),
    SkillId.GETUP: ("seat", "bed", "top", "surface"),
}


@dataclass(frozen=True)
class LocoGoal:
    """Reach a 2D point (Walk) or stay near an anchor (Idle)."""

    target: np.ndarray
    target_speed: float
    mode: SkillId = SkillId.WALK
    object_id: Optional[str] = None


@dataclass(frozen=True)
class HsiGoal:
    """Bring a joint onto an interactable part of a static object."""

    target: np.ndarray
    joint: JointId
    object_id: str
    part_ref: str
    part_points: np.ndarray
    target_speed: float = DEFAULT_SPEED
    standing_target: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DoiGoal:
    """Move a dynamic object to a ground target."""

    bbox_corners: np.ndarray
    target: np.ndarray
    target_speed: float
    object_id: str


GoalCondition = Union[LocoGoal, HsiGoal, DoiGoal]


def _sample_ground(
    rng: np.random.Generator,
    bounds: Tuple[Sequence[float], Sequence[float]],
    accept,
    what: str,
) -> np.ndarray:
    lo, hi = bounds
    for _ in range(SAMPLE_ATTEMPTS):
        xy = np.array([rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])])
        if accept(xy):
            return xy
    raise InfeasibleGoalError(f"no feasible {what} target after {SAMPLE_ATTEMPTS} samples")


def make_loco_goal(
    state: CharacterState,
    mode: SkillId,
    rng: np.random.Generator,
    scene: Optional[Scene] = None,
    target_speed: Optional[float] = None,
    clearance: float = 0.0,
) -> LocoGoal:
    """Walk: uniform ground target at least 1 m away; Idle: the current root."""
    root = state.root_pos[:2].copy()
    if mode is SkillId.IDLE:
        return LocoGoal(root, 0.0 if target_speed is None else target_speed, SkillId.IDLE)
    if mode is not SkillId.WALK:
        raise ValueError(f"locomotion goal for non-locomotion skill {mode.value}")
    if scene is not None:
        bounds = scene.bounds
    else:
        h = OPEN_AREA_HALF_EXTENT
        bounds = ((root[0] - h, root[1] - h), (root[0] + h, root[1] + h))

    def accept(xy: np.ndarray) -> bool:
        if math.hypot(xy[0] - root[0], xy[1] - root[1]) < WALK_MIN_DISTANCE:
            return False
        return scene is None or scene.clearance_ok(xy, clearance)

    target = _sample_ground(rng, bounds, accept, "walk")
    return LocoGoal(target, DEFAULT_SPEED if target_speed is None else target_speed)


def make_approach_goal(
    scene: Scene,
    object_id: str,
    state: CharacterState,
    clearance: float,
    target_speed: float = DEFAULT_SPEED,
    object_root: Optional[Sequence[float]] = None,
) -> LocoGoal:
    """Walk to the nearest point of the object footprint grown by clearance."""
    obj = scene.get(object_id)
    box = obj.aabb
    if object_root is not None:
        box = box.translated(np.asarray(object_root, float) - obj.root_position)
    grown = box.inflated(clearance)
    root = state.root_pos[:2]
    inside = bool(np.all(root >= grown.lo[:2]) and np.all(root <= grown.hi[:2]))
    target = root.copy() if inside else grown.closest_footprint_point(root)
    return LocoGoal(target, target_speed, SkillId.WALK, object_id)


def nearer_hand(
    part: np.ndarray, state: CharacterState
) -> Tuple[JointId, np.ndarray, float]:
    """Hand with the smaller nearest-point distance; ties go to the left hand."""
    best: Optional[Tuple[JointId, np.ndarray, float]] = None
    for hand in HANDS:
        point, dist = nearest_surface_point(part, state.joint(hand))
        if best is None or dist < best[2]:
            best = (hand, point, dist)
    assert best is not None
    return best


def make_hsi_goal(
    scene: Scene,
    object_id: str,
    part_label: str,
    joint: Optional[JointId],
    state: CharacterState,
    target_speed: float = DEFAULT_SPEED,
    object_root: Optional[Sequence[float]] = None,
) -> HsiGoal:
    """Target the part point nearest the joint; joint None picks the nearer hand."""
    obj = scene.get(object_id)
    part = obj.parts.get(part_label)
    if part is None or not len(part):
        raise InfeasibleGoalError(f"object {object_id} has no points in part '{part_label}'")
    if object_root is not None:
        part = part + (np.asarray(object_root, float) - obj.root_position)
    if joint is None:
        joint, target, _ = nearer_hand(part, state)
    else:
        target, _ = nearest_surface_point(part, state.joint(joint))
    return HsiGoal(target, joint, object_id, part_label, part, target_speed)


def standing_point(aabb: Aabb, contact: np.ndarray, margin: float, height: float) -> np.ndarray:
    """Ground point just outside the footprint on the contact side, at pelvis height."""
    center = aabb.centroid[:2]
    direction = contact[:2] - center
    norm = float(np.hypot(direction[0], direction[1]))
    direction = np.array([1.0, 0.0]) if norm == 0.0 else direction / norm
    half = aabb.extent[:2] / 2.0
    scales = [half[i] / abs(direction[i]) for i in range(2) if direction[i] != 0.0]
    exit_distance = min(scales)
    xy = center + (exit_distance + margin) * direction
    return np.array([xy[0], xy[1], height])


def make_getup_goal(
    scene: Scene,
    object_id: str,
    part_label: str,
    state: CharacterState,
    standing_height: float,
    margin: float = 0.3,
    object_root: Optional[Sequence[float]] = None,
) -> HsiGoal:
    """Pelvis goal that starts at the seat contact and ends standing beside the object."""
    goal = make_hsi_goal(
        scene, object_id, part_label, JointId.PELVIS, state, object_root=object_root
    )
    obj = scene.get(object_id)
    box = obj.aabb
    if object_root is not None:
        box = box.translated(np.asarray(object_root, float) - obj.root_position)
    stand = standing_point(box, goal.target, margin, standing_height)
    return HsiGoal(
        goal.target,
        JointId.PELVIS,
        object_id,
        part_label,
        goal.part_points,
        goal.target_speed,
        standing_target=stand,
    )


def make_doi_goal(
    scene: Scene,
    object_id: str,
    target_pos: Optional[Sequence[float]],
    rng: np.random.Generator,
    object_root: Optional[Sequence[float]] = None,
    target_speed: float = DEFAULT_SPEED,
    clearance: float = 0.3,
) -> DoiGoal:
    """Corners of the object box at its current root plus a ground target."""
    obj = scene.get(object_id)
    if not obj.dynamic:
        raise InfeasibleGoalError(f"object {object_id} is static and cannot be carried")
    current = obj.root_position if object_root is None else np.asarray(object_root, float)
    box = obj.aabb.translated(current - obj.root_position)
    height = obj.half_height
    if target_pos is not None:
        target = np.array([float(target_pos[0]), float(target_pos[1]), height])
    else:
        others = [o for o in scene.objects if o.id != object_id]

        def accept(xy: np.ndarray) -> bool:
            if math.hypot(xy[0] - current[0], xy[1] - current[1]) < WALK_MIN_DISTANCE:
                return False
            return all(o.aabb.footprint_distance(xy) > clearance for o in others)

        xy = _sample_ground(rng, scene.bounds, accept, "carry")
        target = np.array([xy[0], xy[1], height])
    return DoiGoal(box.corners(), target, target_speed, object_id)
