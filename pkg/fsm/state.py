"""Episode state, trace records and trace file I/O."""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from agents.script_planner import LongScript
from data_store.errors import HarnessIOError, TraceFormatError
from data_store.script_store import atomic_write_text
from skills.character import CharacterState, ObjectState
from skills.policy import BasePolicy
from tasks.goals import DoiGoal, GoalCondition, HsiGoal, LocoGoal

logger = logging.getLogger(__name__)


class TerminationReason(str, Enum):
    HORIZON_REACHED = "horizon_reached"
    FALL = "fall"
    EXCESSIVE_CONTACT_FORCE = "excessive_contact_force"
    SUCCESS_HOLD = "success_hold"
    SCRIPT_COMPLETE = "script_complete"
    INFEASIBLE = "infeasible"


@dataclass
class FsmState:
    """Mutable state of one running episode."""

    script: LongScript
    char: CharacterState
    dyn_objects: Dict[str, ObjectState]
    rng: np.random.Generator
    seed: int = 0
    cursor: int = 0
    goal: Optional[GoalCondition] = None
    hold_count: int = 0
    tick: int = 0
    phase: str = ""
    policy: Optional[BasePolicy] = None
    z: Optional[np.ndarray] = None
    keyframe_start: int = 0
    last_error: float = float("inf")
    contact_part: Optional[str] = None
    window: List[CharacterState] = field(default_factory=list)
    outcomes: List["KeyframeOutcome"] = field(default_factory=list)
    records: List["TickRecord"] = field(default_factory=list)
    termination: Optional[TerminationReason] = None

    @property
    def done(self) -> bool:
        return self.termination is not None

    @property
    def keyframe_count(self) -> int:
        return len(self.script.keyframes)


def _vec(values: Any) -> List[float]:
    return [float(v) for v in np.asarray(values, dtype=np.float64).reshape(-1)]


def goal_record(goal: Optional[GoalCondition]) -> Optional[Dict[str, Any]]:
    """JSON-ready view of a goal condition."""
    if goal is None:
        return None
    if isinstance(goal, LocoGoal):
        return {
            "kind": "loco",
            "mode": goal.mode.value,
            "target": _vec(goal.target),
            "target_speed": goal.target_speed,
            "object_id": goal.object_id,
        }
    if isinstance(goal, HsiGoal):
        record: Dict[str, Any] = {
            "kind": "hsi",
            "target": _vec(goal.target),
            "joint": goal.joint.value,
            "object_id": goal.object_id,
            "part": goal.part_ref,
            "target_speed": goal.target_speed,
        }
        if goal.standing_target is not None:
            record["standing_target"] = _vec(goal.standing_target)
        return record
    if isinstance(goal, DoiGoal):
        return {
            "kind": "doi",
            "target": _vec(goal.target),
            "bbox_corners": _vec(goal.bbox_corners),
            "target_speed": goal.target_speed,
            "object_id": goal.object_id,
        }
    raise TypeError(f"unknown goal type {type(goal).__name__}")


class TickRecord(BaseModel):
    """One simulated tick."""

    tick: int
    keyframe: int
    skill: str
    root_pos: List[float]
    root_vel: List[float]
    yaw: float
    posture: str
    joints: Dict[str, List[float]]
    joint_rotations: Dict[str, List[float]]
    objects: Dict[str, List[float]] = Field(default_factory=dict)
    goal: Optional[Dict[str, Any]] = None
    task_reward: Dict[str, Any] = Field(default_factory=dict)
    style_reward: float = 0.0
    reward: float = 0.0
    heightmap_hash: str = ""


def tick_record(
    fsm: FsmState,
    skill: str,
    task_reward: Dict[str, Any],
    style_reward: float,
    reward: float,
    heightmap_hash: str,
) -> TickRecord:
    """Snapshot the post-tick character and objects."""
    char = fsm.char
    return TickRecord(
        tick=fsm.tick,
        keyframe=fsm.cursor,
        skill=skill,
        root_pos=_vec(char.root_pos),
        root_vel=_vec(char.root_vel),
        yaw=float(char.yaw),
        posture=char.posture.value,
        joints={j.value: _vec(p) for j, p in char.joints.items()},
        joint_rotations={j.value: _vec(q) for j, q in char.joint_rotations.items()},
        objects={oid: _vec(o.root) for oid, o in fsm.dyn_objects.items()},
        goal=goal_record(fsm.goal),
        task_reward=task_reward,
        style_reward=style_reward,
        reward=reward,
        heightmap_hash=heightmap_hash,
    )


class KeyframeOutcome(BaseModel):
    """Result of one attempted keyframe."""

    index: int
    skill: str
    object_id: Optional[str] = None
    success: bool
    error: Optional[float] = None
    ticks: int


class TraceSummary(BaseModel):
    """Last line of a trace file."""

    seed: int
    termination: TerminationReason
    ticks: int
    outcomes: List[KeyframeOutcome] = Field(default_factory=list)
    script: LongScript = Field(default_factory=LongScript)


class ExecutionTrace(BaseModel):
    """Per-tick records, per-keyframe outcomes and the termination reason."""

    seed: int = 0
    records: List[TickRecord] = Field(default_factory=list)
    outcomes: List[KeyframeOutcome] = Field(default_factory=list)
    termination: TerminationReason = TerminationReason.HORIZON_REACHED
    script: LongScript = Field(default_factory=LongScript)

    @property
    def ticks(self) -> int:
        return len(self.records)

    def summary(self) -> TraceSummary:
        return TraceSummary(
            seed=self.seed,
            termination=self.termination,
            ticks=self.ticks,
            outcomes=self.outcomes,
            script=self.script,
        )


def dumps_trace(trace: ExecutionTrace) -> str:
    """JSON lines: one object per tick, then {"summary": ...}."""
    lines = [json.dumps(r.model_dump(mode="json"), sort_keys=True) for r in trace.records]
    summary = trace.summary().model_dump(mode="json")
    summary["script"] = trace.script.to_record()
    lines.append(json.dumps({"summary": summary}, sort_keys=True))
    return "\n".join(lines) + "\n"


def save_trace(trace: ExecutionTrace, path: str) -> None:
    """Write a trace file atomically."""
    atomic_write_text(path, dumps_trace(trace))


def load_trace(path: str) -> ExecutionTrace:
    """Read a trace written by save_trace."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = [line for line in f.read().splitlines() if line.strip()]
    except OSError as e:
        logger.error(f"Failed to read trace {path}: {e}")
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    if not lines:
        raise TraceFormatError(f"{path}: empty trace file")
    records: List[TickRecord] = []
    try:
        for line in lines[:-1]:
            records.append(TickRecord.model_validate(json.loads(line)))
        tail = json.loads(lines[-1])
        if not isinstance(tail, dict) or "summary" not in tail:
            raise TraceFormatError(f"{path}: last line is not a summary")
        summary = TraceSummary.model_validate(tail["summary"])
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"{path}: invalid JSON: {e}") from e
    except ValidationError as e:
        raise TraceFormatError(f"{path}: malformed trace record: {e}") from e
    if summary.ticks != len(records):
        raise TraceFormatError(
            f"{path}: summary reports {summary.ticks} ticks, file has {len(records)}"
        )
    return ExecutionTrace(
        seed=summary.seed,
        records=records,
        outcomes=summary.outcomes,
        termination=summary.termination,
        script=summary.script,
    )
