"""Character proprioception, object state and actions."""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np


class JointId(str, Enum):
    """Minimal joint set; order defines metric feature layout."""

    PELVIS = "pelvis"
    LEFT_HAND = "left_hand"
    RIGHT_HAND = "right_hand"
    LEFT_FOOT = "left_foot"
    RIGHT_FOOT = "right_foot"
    HEAD = "head"


JOINT_ORDER = tuple(JointId)
HANDS = (JointId.LEFT_HAND, JointId.RIGHT_HAND)


class Posture(str, Enum):
    STANDING = "standing"
    SEATED = "seated"
    LYING = "lying"


POSTURE_CODES = {Posture.STANDING: 0.0, Posture.SEATED: 1.0, Posture.LYING: 2.0}

# Joint offsets from the pelvis in the heading frame (x forward, y left).
_OFFSETS: Dict[Posture, Dict[JointId, Sequence[float]]] = {
    Posture.STANDING: {
        JointId.PELVIS: (0.0, 0.0, 0.0),
        JointId.LEFT_HAND: (0.0, 0.25, 0.0),
        JointId.RIGHT_HAND: (0.0, -0.25, 0.0),
        JointId.LEFT_FOOT: (0.0, 0.1, -0.9),
        JointId.RIGHT_FOOT: (0.0, -0.1, -0.9),
        JointId.HEAD: (0.0, 0.0, 0.7),
    },
    Posture.SEATED: {
        JointId.PELVIS: (0.0, 0.0, 0.0),
        JointId.LEFT_HAND: (0.15, 0.25, 0.0),
        JointId.RIGHT_HAND: (0.15, -0.25, 0.0),
        JointId.LEFT_FOOT: (0.45, 0.1, -0.45),
        JointId.RIGHT_FOOT: (0.45, -0.1, -0.45),
        JointId.HEAD: (-0.05, 0.0, 0.65),
    },
    Posture.LYING: {
        JointId.PELVIS: (0.0, 0.0, 0.0),
        JointId.LEFT_HAND: (0.1, 0.25, 0.0),
        JointId.RIGHT_HAND: (0.1, -0.25, 0.0),
        JointId.LEFT_FOOT: (-0.9, 0.1, 0.0),
        JointId.RIGHT_FOOT: (-0.9, -0.1, 0.0),
        JointId.HEAD: (0.7, 0.0, 0.05),
    },
}


def wrap_angle(angle: float) -> float:
    """Map an angle to [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def yaw_quaternion(yaw: float) -> np.ndarray:
    """Unit quaternion (w, x, y, z) for a rotation about +z."""
    return np.array([math.cos(yaw / 2.0), 0.0, 0.0, math.sin(yaw / 2.0)])


def posture_joints(root: np.ndarray, yaw: float, posture: Posture) -> Dict[JointId, np.ndarray]:
    """Rigid joint layout for a posture; feet never go below the ground."""
    c, s = math.cos(yaw), math.sin(yaw)
    joints = {}
    for joint, (ox, oy, oz) in _OFFSETS[posture].items():
        pos = np.array([root[0] + c * ox - s * oy, root[1] + s * ox + c * oy, root[2] + oz])
        if joint in (JointId.LEFT_FOOT, JointId.RIGHT_FOOT):
            pos[2] = max(pos[2], 0.0)
        joints[joint] = pos
    return joints


@dataclass(frozen=True)
class CharacterState:
    """Proprioception: root pose and velocity, facing, joints, posture."""

    root_pos: np.ndarray
    root_vel: np.ndarray
    yaw: float
    joints: Dict[JointId, np.ndarray]
    joint_rotations: Dict[JointId, np.ndarray]
    posture: Posture = Posture.STANDING

    @property
    def facing(self) -> np.ndarray:
        """Unit heading vector in the ground plane."""
        return np.array([math.cos(self.yaw), math.sin(self.yaw), 0.0])

    @property
    def pelvis(self) -> np.ndarray:
        return self.joints[JointId.PELVIS]

    def joint(self, joint: JointId) -> np.ndarray:
        return self.joints[joint]

    def vector(self) -> np.ndarray:
        """Flat proprioception: root pos, root vel, facing, joints, rotations."""
        parts = [self.root_pos, self.root_vel, self.facing]
        parts += [self.joints[j] for j in JOINT_ORDER if j in self.joints]
        parts += [self.joint_rotations[j] for j in JOINT_ORDER if j in self.joint_rotations]
        return np.concatenate(parts)

    def with_joint(self, joint: JointId, position: np.ndarray) -> "CharacterState":
        """Copy with one joint moved; moving the pelvis moves the root."""
        joints = dict(self.joints)
        joints[joint] = np.asarray(position, dtype=np.float64)
        if joint is JointId.PELVIS:
            return replace(self, joints=joints, root_pos=joints[joint].copy())
        return replace(self, joints=joints)


def standing_state(
    xy: Sequence[float], yaw: float, height: float = 0.9
) -> CharacterState:
    """Default standing pose at rest."""
    root = np.array([float(xy[0]), float(xy[1]), height])
    return make_state(root, np.zeros(3), yaw, Posture.STANDING)


def make_state(
    root: np.ndarray,
    root_vel: np.ndarray,
    yaw: float,
    posture: Posture,
    overrides: Optional[Dict[JointId, np.ndarray]] = None,
) -> CharacterState:
    """Build a state from a root pose, with optional explicit joint positions."""
    joints = posture_joints(root, yaw, posture)
    joints.update({k: np.asarray(v, dtype=np.float64) for k, v in (overrides or {}).items()})
    joints[JointId.PELVIS] = np.asarray(root, dtype=np.float64).copy()
    quat = yaw_quaternion(yaw)
    return CharacterState(
        root_pos=np.asarray(root, dtype=np.float64).copy(),
        root_vel=np.asarray(root_vel, dtype=np.float64).copy(),
        yaw=wrap_angle(yaw),
        joints=joints,
        joint_rotations={j: quat.copy() for j in JOINT_ORDER},
        posture=posture,
    )


@dataclass(frozen=True)
class ObjectState:
    """Root state of a dynamic object during an episode."""

    root: np.ndarray
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    held: bool = False


@dataclass(frozen=True)
class Action:
    """Opaque policy output."""

    values: np.ndarray

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("action has non-finite entries")

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])
