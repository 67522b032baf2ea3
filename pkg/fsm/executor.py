"""Episode executor: goal construction, completion, termination and ticking."""

import hashlib
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from agents.script_planner import LongScript, bind_objects
from data_store.errors import InfeasibleError, UnsatisfiablePlanError
from data_store.models import Keyframe, SkillId, UNCONDITIONED_SKILLS
from embedding.providers import EmbeddingProvider, HashEmbedder
from fsm.seeding import GOALS_TAG, SPAWN_TAG, derive_rng
from fsm.state import (
    ExecutionTrace,
    FsmState,
    KeyframeOutcome,
    TerminationReason,
    tick_record,
)
from scene.heightmap import compute_heightmap
from scene.scene import Scene, sample_spawn
from skills.character import CharacterState, JointId, ObjectState, Posture, standing_state
from skills.policy import Observation, PolicyRegistry
from skills.style_reward import StubStyleReward, StyleRewardProvider
from tasks.config import EpisodeConfig
from tasks.goals import (
    PART_PREFERENCES,
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
from tasks.rewards import (
    GetUpPhase,
    RewardBreakdown,
    combine,
    contact_point,
    doi_reward,
    getup_reward,
    hsi_reward,
    idle_reward,
    loco_reward,
)

logger = logging.getLogger(__name__)


def heightmap_hash(grid: np.ndarray) -> str:
    """Short stable digest of a heightmap grid."""
    data = np.ascontiguousarray(grid, dtype="<f8").tobytes()
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def keyframe_embedding(
    kf: Keyframe, provider: EmbeddingProvider, dim: int
) -> np.ndarray:
    """Caption embedding, else style-name embedding, else zeros; Reach/GetUp always zeros."""
    if kf.skill in UNCONDITIONED_SKILLS:
        return np.zeros(dim)
    if kf.caption:
        return provider.embed(kf.caption)
    if kf.style is not None:
        return provider.embed(kf.style.value)
    return np.zeros(dim)


def _dynamic_root(fsm: FsmState, object_id: str) -> Optional[np.ndarray]:
    obj = fsm.dyn_objects.get(object_id)
    return None if obj is None else obj.root


def _build_goal(
    fsm: FsmState, scene: Scene, cfg: EpisodeConfig, kf: Keyframe
) -> GoalCondition:
    object_id = fsm.script.scene_binding.get(fsm.cursor)
    char = fsm.char
    skill = kf.skill
    if skill is SkillId.WALK:
        if object_id is None:
            return make_loco_goal(
                char, SkillId.WALK, fsm.rng, scene, cfg.walk_speed, cfg.spawn_clearance
            )
        return make_approach_goal(
            scene,
            object_id,
            char,
            cfg.spawn_clearance,
            cfg.walk_speed,
            object_root=_dynamic_root(fsm, object_id),
        )
    if skill is SkillId.IDLE:
        return make_loco_goal(char, SkillId.IDLE, fsm.rng)
    if object_id is None:
        raise UnsatisfiablePlanError([kf.object_ref or skill.value])
    obj = scene.get(object_id)
    if skill is SkillId.CARRY:
        return make_doi_goal(
            scene,
            object_id,
            None,
            fsm.rng,
            object_root=_dynamic_root(fsm, object_id),
            target_speed=cfg.carry_speed,
        )
    if skill is SkillId.GETUP:
        part = fsm.contact_part or obj.first_part(PART_PREFERENCES[SkillId.GETUP])
        return make_getup_goal(
            scene,
            object_id,
            part,
            char,
            cfg.standing_height,
            object_root=_dynamic_root(fsm, object_id),
        )
    part = obj.first_part(PART_PREFERENCES[skill])
    if skill in (SkillId.SIT, SkillId.LIE):
        fsm.contact_part = part
    joint = None if skill is SkillId.REACH else JointId.PELVIS
    return make_hsi_goal(
        scene,
        object_id,
        part,
        joint,
        char,
        cfg.approach_speed,
        object_root=_dynamic_root(fsm, object_id),
    )


def start_keyframe(
    fsm: FsmState,
    scene: Scene,
    cfg: EpisodeConfig,
    registry: PolicyRegistry,
    provider: EmbeddingProvider,
) -> None:
    """Construct the goal, policy and z for the keyframe under the cursor."""
    fsm.hold_count = 0
    fsm.keyframe_start = fsm.tick
    fsm.last_error = float("inf")
    fsm.window = []
    if fsm.cursor >= fsm.keyframe_count:
        fsm.goal = None
        fsm.policy = None
        return
    kf = fsm.script.keyframes[fsm.cursor]
    fsm.policy = registry.create(kf.skill)
    fsm.goal = _build_goal(fsm, scene, cfg, kf)
    fsm.z = keyframe_embedding(kf, provider, cfg.embed_dim)
    fsm.phase = GetUpPhase.SEATED.value if kf.skill is SkillId.GETUP else ""
    logger.debug(
        f"Keyframe {fsm.cursor} started at tick {fsm.tick}: {kf.skill.value} "
        f"{fsm.script.scene_binding.get(fsm.cursor, '')}"
    )


def _check_binding(script: LongScript, scene: Scene) -> LongScript:
    binding = dict(script.scene_binding)
    if not binding and any(kf.object_ref for kf in script.keyframes):
        binding = bind_objects(script.keyframes, scene)
    missing = sorted({oid for oid in binding.values() if not scene.has(oid)})
    unbound = [
        kf.object_ref or kf.skill.value
        for i, kf in enumerate(script.keyframes)
        if kf.object_ref and i not in binding
    ]
    if missing or unbound:
        raise UnsatisfiablePlanError(missing + unbound)
    return script.model_copy(update={"scene_binding": binding})


def init_episode(
    scene: Scene,
    script: LongScript,
    cfg: EpisodeConfig,
    seed: int,
    registry: PolicyRegistry,
    provider: Optional[EmbeddingProvider] = None,
) -> FsmState:
    """Spawn the character, place dynamic objects and start the first keyframe."""
    script = _check_binding(script, scene)
    xy, yaw = sample_spawn(scene, derive_rng(seed, SPAWN_TAG), cfg.spawn_clearance)
    dyn = {
        o.id: ObjectState(o.root_position.copy(), np.zeros(3), False)
        for o in scene.dynamic_objects()
    }
    fsm = FsmState(
        script=script,
        char=standing_state(xy, yaw, cfg.standing_height),
        dyn_objects=dyn,
        rng=derive_rng(seed, GOALS_TAG),
        seed=seed,
    )
    provider = provider or HashEmbedder(cfg.embed_dim, cfg.embed_seed)
    start_keyframe(fsm, scene, cfg, registry, provider)
    return fsm


def completion_error(fsm: FsmState, cfg: EpisodeConfig) -> Tuple[float, float]:
    """(error, threshold) of the active goal's success condition."""
    goal = fsm.goal
    char = fsm.char
    kf = fsm.script.keyframes[fsm.cursor]
    if isinstance(goal, LocoGoal):
        diff = goal.target[:2] - char.root_pos[:2]
        return float(np.hypot(diff[0], diff[1])), cfg.thresholds.loco
    if isinstance(goal, HsiGoal):
        joint = char.joint(goal.joint)
        if kf.skill is SkillId.GETUP:
            assert goal.standing_target is not None
            return float(np.linalg.norm(goal.standing_target - joint)), cfg.thresholds.getup
        error = float(np.linalg.norm(contact_point(goal, joint) - joint))
        return error, cfg.thresholds.for_skill(kf.skill)
    if isinstance(goal, DoiGoal):
        obj = fsm.dyn_objects[goal.object_id]
        return float(np.linalg.norm(goal.target - obj.root)), cfg.thresholds.carry
    raise TypeError("no active goal")


def check_completion(fsm: FsmState, cfg: EpisodeConfig) -> bool:
    """Update the hold counter; true once the condition held for hold_time."""
    if fsm.goal is None:
        return False
    error, threshold = completion_error(fsm, cfg)
    fsm.last_error = error
    if error <= threshold:
        fsm.hold_count += 1
    else:
        fsm.hold_count = 0
    return fsm.hold_count >= cfg.hold_ticks


def _is_final_hold(fsm: FsmState, cfg: EpisodeConfig) -> bool:
    return cfg.hold_final_keyframe and fsm.cursor == fsm.keyframe_count - 1


def check_termination(
    fsm: FsmState, cfg: EpisodeConfig, force_proxy: float = 0.0
) -> Optional[TerminationReason]:
    """First applicable reason among fall, force, success hold, completion, horizon."""
    char = fsm.char
    if char.posture is Posture.STANDING and float(char.pelvis[2]) < cfg.fall_height:
        return TerminationReason.FALL
    if force_proxy > cfg.max_contact_force:
        return TerminationReason.EXCESSIVE_CONTACT_FORCE
    if _is_final_hold(fsm, cfg) and fsm.hold_count >= cfg.success_hold_ticks:
        return TerminationReason.SUCCESS_HOLD
    if fsm.cursor >= fsm.keyframe_count:
        return TerminationReason.SCRIPT_COMPLETE
    if fsm.tick >= cfg.horizon:
        return TerminationReason.HORIZON_REACHED
    return None


def _task_reward(
    fsm: FsmState, prev_char: CharacterState, skill: SkillId, cfg: EpisodeConfig
) -> RewardBreakdown:
    goal = fsm.goal
    char = fsm.char
    if isinstance(goal, LocoGoal):
        if skill is SkillId.IDLE:
            return idle_reward(char, prev_char, goal, cfg.idle_radius)
        return loco_reward(char, prev_char, goal)
    if isinstance(goal, HsiGoal):
        joint = char.joint(goal.joint)
        if skill is SkillId.GETUP:
            seated = float(np.linalg.norm(joint - goal.target)) <= cfg.thresholds.getup
            phase = GetUpPhase.SEATED if seated else GetUpPhase.RISING
            fsm.phase = phase.value
            return getup_reward(char, joint, goal, phase)
        return hsi_reward(char, joint, goal)
    if isinstance(goal, DoiGoal):
        obj = fsm.dyn_objects[goal.object_id]
        fsm.phase = "transport" if obj.held else "approach"
        return doi_reward(char, None, obj, goal, cfg.thresholds.carry)
    raise TypeError("no active goal")


def _moved_objects(fsm: FsmState, scene: Scene) -> Dict[str, np.ndarray]:
    moved = {}
    for oid, obj in fsm.dyn_objects.items():
        if not np.array_equal(obj.root, scene.get(oid).root_position):
            moved[oid] = obj.root
    return moved


def _record_outcome(fsm: FsmState, success: bool) -> None:
    kf = fsm.script.keyframes[fsm.cursor]
    error = fsm.last_error if np.isfinite(fsm.last_error) else None
    fsm.outcomes.append(
        KeyframeOutcome(
            index=fsm.cursor,
            skill=kf.skill.value,
            object_id=fsm.script.scene_binding.get(fsm.cursor),
            success=success,
            error=error,
            ticks=fsm.tick - fsm.keyframe_start,
        )
    )


def tick(
    fsm: FsmState,
    scene: Scene,
    registry: PolicyRegistry,
    cfg: EpisodeConfig,
    provider: EmbeddingProvider,
    style: Optional[StyleRewardProvider] = None,
) -> Tuple[FsmState, List[str]]:
    """Advance the episode by one control step."""
    if fsm.policy is None or fsm.goal is None:
        raise RuntimeError("tick called on a finished episode")
    events: List[str] = []
    kf = fsm.script.keyframes[fsm.cursor]
    policy = fsm.policy
    z = fsm.z if fsm.z is not None else np.zeros(cfg.embed_dim)

    hmap = compute_heightmap(
        scene,
        fsm.char.root_pos,
        fsm.char.yaw,
        dynamic_roots=_moved_objects(fsm, scene),
        gating=cfg.heightmap_gating,
    )
    obs = Observation(
        skill=kf.skill,
        state=fsm.char,
        heightmap=hmap.grid,
        goal=fsm.goal,
        z=z,
        objects=dict(fsm.dyn_objects),
        phase=fsm.phase,
        dt=cfg.dt,
    )
    action = policy.act(obs)
    prev_char = fsm.char
    fsm.char = policy.advance(prev_char, action, cfg.dt)
    fsm.dyn_objects = policy.advance_objects(fsm.dyn_objects, action, cfg.dt)
    fsm.tick += 1

    task = _task_reward(fsm, prev_char, kf.skill, cfg)
    fsm.window = (fsm.window + [fsm.char])[-cfg.style_window :]
    style_r = (style or StubStyleReward()).style_reward(fsm.window, z)
    reward = combine(style_r, task.total, cfg)

    completed = check_completion(fsm, cfg)
    fsm.records.append(
        tick_record(
            fsm, kf.skill.value, task.to_dict(), style_r, reward, heightmap_hash(hmap.grid)
        )
    )
    if completed and not _is_final_hold(fsm, cfg):
        _record_outcome(fsm, True)
        events.append(f"keyframe_complete:{fsm.cursor}")
        fsm.cursor += 1
        start_keyframe(fsm, scene, cfg, registry, provider)
    return fsm, events


def _finish(fsm: FsmState, reason: TerminationReason, cfg: EpisodeConfig) -> ExecutionTrace:
    fsm.termination = reason
    if fsm.cursor < fsm.keyframe_count:
        success = reason is TerminationReason.SUCCESS_HOLD or (
            _is_final_hold(fsm, cfg) and fsm.hold_count >= cfg.hold_ticks
        )
        _record_outcome(fsm, success)
    return ExecutionTrace(
        seed=fsm.seed,
        records=fsm.records,
        outcomes=fsm.outcomes,
        termination=reason,
        script=fsm.script,
    )


def run_episode(
    scene: Scene,
    script: LongScript,
    cfg: EpisodeConfig,
    registry: PolicyRegistry,
    seed: int,
    provider: Optional[EmbeddingProvider] = None,
    style: Optional[StyleRewardProvider] = None,
) -> ExecutionTrace:
    """Tick until a termination condition fires."""
    provider = provider or HashEmbedder(cfg.embed_dim, cfg.embed_seed)
    style = style or StubStyleReward()
    script = _check_binding(script, scene)
    try:
        fsm = init_episode(scene, script, cfg, seed, registry, provider)
    except InfeasibleError as e:
        logger.warning(f"Episode {seed} infeasible at init: {e}")
        return ExecutionTrace(seed=seed, termination=TerminationReason.INFEASIBLE, script=script)

    while True:
        force = fsm.policy.contact_force() if fsm.policy is not None else 0.0
        reason = check_termination(fsm, cfg, force)
        if reason is not None:
            break
        try:
            tick(fsm, scene, registry, cfg, provider, style)
        except InfeasibleError as e:
            logger.warning(f"Episode {seed} infeasible at tick {fsm.tick}: {e}")
            reason = TerminationReason.INFEASIBLE
            break
    trace = _finish(fsm, reason, cfg)
    logger.info(
        f"Episode {seed} finished: {reason.value} after {trace.ticks} ticks, "
        f"{sum(o.success for o in trace.outcomes)}/{len(trace.outcomes)} keyframes succeeded"
    )
    return trace


def run_keyframes(
    scene: Scene,
    keyframes: Sequence[Keyframe],
    cfg: EpisodeConfig,
    registry: PolicyRegistry,
    seed: int,
) -> ExecutionTrace:
    """run_episode on a bare keyframe list, binding objects on the fly."""
    script = LongScript(keyframes=list(keyframes), scene_binding=bind_objects(keyframes, scene))
    return run_episode(scene, script, cfg, registry, seed)
