"""Direct long-script generation from the full skill list, without retrieval.

The narrative provider sees every skill the scene affords and writes the whole
keyframe sequence in one pass. Without a provider, or when it fails, the
deterministic narrator tours the skill list in a fixed order. Either way the
result goes through transition insertion and object binding like a retrieved
plan, so the two planners can be compared on the same scene.
"""

from typing import List, Optional

from agents.base_agent import BaseAgent
from agents.narrative import (
    DEFAULT_KEYFRAME_BUDGET,
    DeterministicNarrator,
    Generation,
    NarrativeProvider,
)
from agents.script_planner import LongScript, Theme, bind_objects
from agents.skill_grammar import insert_transitions
from data_store.models import Keyframe, SkillId
from embedding.providers import EmbeddingProvider
from scene.scene import Scene, SceneObject

SEAT_HEIGHT = (0.3, 0.6)
LIE_MIN_AREA = 1.2
REACH_MIN_HEIGHT = 0.7


def _affords(obj: SceneObject, skill: SkillId) -> bool:
    top = float(obj.aabb.hi[2])
    if skill is SkillId.CARRY:
        return obj.dynamic
    if obj.dynamic:
        return False
    if skill is SkillId.SIT:
        return SEAT_HEIGHT[0] <= top <= SEAT_HEIGHT[1]
    if skill is SkillId.LIE:
        area = float(obj.aabb.extent[0] * obj.aabb.extent[1])
        return top <= SEAT_HEIGHT[1] and area >= LIE_MIN_AREA
    if skill is SkillId.REACH:
        return top >= REACH_MIN_HEIGHT
    return False


def scene_skill_list(scene: Scene) -> List[Keyframe]:
    """Every (skill, category) pair the scene affords, plus one Idle.

    A category is judged by its first instance in scene order.
    """
    entries: List[Keyframe] = []
    for skill in (SkillId.SIT, SkillId.LIE, SkillId.REACH, SkillId.CARRY):
        for category in scene.categories():
            if _affords(scene.by_category(category)[0], skill):
                entries.append(Keyframe(skill=skill, object_ref=category))
    entries.append(Keyframe(skill=SkillId.IDLE))
    return entries


def generate_direct(
    theme: Theme,
    scene: Scene,
    provider: EmbeddingProvider,
    narrator: Optional[NarrativeProvider] = None,
    n_keyframes: int = DEFAULT_KEYFRAME_BUDGET,
) -> LongScript:
    """Long script written in one pass from the scene's skill list."""
    if n_keyframes < 1:
        raise ValueError(f"n_keyframes must be >= 1, got {n_keyframes}")
    skills = scene_skill_list(scene)
    synopsis = scene.synopsis()
    available = set(scene.categories()) | {o.id for o in scene.objects}
    fallback = DeterministicNarrator(provider)

    def tour() -> Generation:
        return fallback.generate(theme.text, skills, synopsis, n_keyframes)

    def from_provider() -> Generation:
        assert narrator is not None
        answer = narrator.generate(theme.text, skills, synopsis, n_keyframes)
        keyframes = [
            kf for kf in answer.keyframes if not kf.object_ref or kf.object_ref in available
        ]
        if not keyframes:
            raise ValueError("provider generated no scene-compatible keyframe")
        return Generation(keyframes=keyframes[:n_keyframes], prose=answer.prose)

    if narrator is None or isinstance(narrator, DeterministicNarrator):
        generation = tour()
    else:
        generation = BaseAgent("DirectGenerator").with_fallback(
            "generate", from_provider, tour
        )
    keyframes = insert_transitions(generation.keyframes)
    return LongScript(
        theme=theme.text,
        keyframes=keyframes,
        scene_binding=bind_objects(keyframes, scene),
        prose=generation.prose,
    )


class DirectPlannerAgent(BaseAgent):
    """Plans a long script without style selection or retrieval."""

    def __init__(
        self,
        provider: EmbeddingProvider,
        narrator: Optional[NarrativeProvider] = None,
        n_keyframes: int = DEFAULT_KEYFRAME_BUDGET,
    ):
        """Initialize the direct planner."""
        super().__init__("DirectPlanner")
        self.provider = provider
        self.narrator = narrator
        self.n_keyframes = n_keyframes

    def plan(self, theme_text: str, scene: Scene) -> LongScript:
        """Generate a long script for a theme in a scene."""
        theme = Theme(theme_text)
        script = generate_direct(
            theme, scene, self.provider, self.narrator, self.n_keyframes
        )
        self.log_info(f"Generated long script directly: {len(script.keyframes)} keyframes")
        return script
