"""Retrieval-augmented long-script planning.

Pipeline: select styles for a theme, retrieve the top-k short scripts of each
style, let a narrative provider pick and order them, concatenate, insert
transitions and bind every object reference to a scene instance.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from agents.base_agent import BaseAgent
from agents.narrative import (
    Candidate,
    Composition,
    DeterministicNarrator,
    NarrativeProvider,
    greedy_selection,
)
from agents.skill_grammar import (
    OPEN_POSTURES,
    insert_transitions_tracked,
    validate_skill_sequence,
)
from data_store.errors import HarnessIOError, ScriptValidationError, UnsatisfiablePlanError
from data_store.models import Keyframe, ShortScript, SkillId, StyleLabel
from data_store.script_store import ScriptDatabase, atomic_write_text
from embedding.providers import EmbeddingProvider
from embedding.vectors import EmbeddingVector, similarity_matrix
from scene.scene import Scene, SceneObject

DEFAULT_M = 3
DEFAULT_K = 5


@dataclass
class Theme:
    """User theme sentence; its embedding is computed on first use."""

    text: str
    _embedding: Optional[EmbeddingVector] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ScriptValidationError("theme text is empty", ["theme: empty"])

    def embedding(self, provider: EmbeddingProvider) -> EmbeddingVector:
        if self._embedding is None:
            self._embedding = provider.embed(self.text)
        return self._embedding


class Provenance(BaseModel):
    """Output keyframe span [start, end] contributed by one short script."""

    script_id: str
    start: int
    end: int


class LongScript(BaseModel):
    """Assembled plan: keyframes, where they came from and what they touch."""

    theme: str = ""
    keyframes: List[Keyframe] = Field(default_factory=list)
    provenance: List[Provenance] = Field(default_factory=list)
    scene_binding: Dict[int, str] = Field(default_factory=dict)
    prose: Optional[str] = None

    def skills(self) -> List[SkillId]:
        return [kf.skill for kf in self.keyframes]

    def is_valid(self) -> bool:
        """Grammar holds and every object-bearing keyframe is bound."""
        bound = all(
            i in self.scene_binding
            for i, kf in enumerate(self.keyframes)
            if kf.object_ref
        )
        return bound and validate_skill_sequence(self.skills())

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready form with string binding keys."""
        return {
            "theme": self.theme,
            "keyframes": [kf.to_record() for kf in self.keyframes],
            "provenance": [p.model_dump() for p in self.provenance],
            "scene_binding": {str(i): oid for i, oid in sorted(self.scene_binding.items())},
            "prose": self.prose,
        }


def save_long_script(script: LongScript, path: str) -> None:
    """Write a plan as indented JSON."""
    atomic_write_text(path, json.dumps(script.to_record(), indent=2) + "\n")


def load_long_script(path: str) -> LongScript:
    """Read a plan written by save_long_script."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ScriptValidationError(f"{path}: invalid JSON", [f"line {e.lineno}: {e.msg}"]) from e
    try:
        return LongScript.model_validate(payload)
    except ValidationError as e:
        violations = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        ]
        raise ScriptValidationError(f"{path}: malformed long script", violations) from e


def select_styles(
    theme: Theme,
    m: int,
    provider: EmbeddingProvider,
    narrator: Optional[NarrativeProvider] = None,
) -> List[StyleLabel]:
    """At most m distinct styles; provider answers outside the label set are dropped."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    names = [s.value for s in StyleLabel]
    fallback = DeterministicNarrator(provider)
    if narrator is not None:
        agent = BaseAgent("StyleSelector")
        chosen = agent.with_fallback(
            "select_styles",
            lambda: narrator.select_styles(theme.text, names, m),
            lambda: fallback.select_styles(theme.text, names, m),
        )
    else:
        chosen = fallback.select_styles(theme.text, names, m)
    styles: List[StyleLabel] = []
    for name in chosen:
        if name in names and StyleLabel(name) not in styles:
            styles.append(StyleLabel(name))
    if not styles:
        styles = [StyleLabel(n) for n in fallback.select_styles(theme.text, names, m)]
    return styles[:m]


def retrieve(
    db: ScriptDatabase,
    theme: Theme,
    styles: Sequence[StyleLabel],
    k: int,
    provider: EmbeddingProvider,
) -> List[Tuple[str, float]]:
    """Top-k ids per style by cosine similarity to the theme; ties by id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query = theme.embedding(provider)
    results: List[Tuple[str, float]] = []
    for style in styles:
        ids, keys = db.key_matrix(style)
        if not ids:
            continue
        sims = similarity_matrix(query, keys)
        order = sorted(range(len(ids)), key=lambda i: (-sims[i], ids[i]))
        results.extend((ids[i], float(sims[i])) for i in order[:k])
    return results


def script_categories(script: ShortScript) -> List[str]:
    """Distinct object references of a script, in first-use order."""
    seen: List[str] = []
    for kf in script.keyframes:
        if kf.object_ref and kf.object_ref not in seen:
            seen.append(kf.object_ref)
    return seen


def _matching(scene: Scene, ref: str) -> List[SceneObject]:
    if scene.has(ref):
        return [scene.get(ref)]
    return scene.by_category(ref)


def _available_refs(scene: Scene) -> List[str]:
    return sorted(set(scene.categories()) | {o.id for o in scene.objects})


def bind_objects(keyframes: Sequence[Keyframe], scene: Scene) -> Dict[int, str]:
    """Resolve each object reference to the nearest matching instance.

    Nearest is measured from the previously bound centroid, or from the spawn
    hint for the first binding. A GetUp binds to the object it closes.
    """
    binding: Dict[int, str] = {}
    anchor = np.asarray(scene.spawn_hint, dtype=np.float64)
    opener: Optional[str] = None
    for i, kf in enumerate(keyframes):
        if kf.skill is SkillId.GETUP and opener is not None:
            binding[i] = opener
            opener = None
            continue
        if not kf.object_ref:
            continue
        options = _matching(scene, kf.object_ref)
        if not options:
            raise UnsatisfiablePlanError([kf.object_ref])
        best = min(
            options,
            key=lambda o: (float(np.linalg.norm(o.aabb.centroid[:2] - anchor[:2])), o.id),
        )
        binding[i] = best.id
        anchor = best.aabb.centroid[:2]
        if kf.skill in OPEN_POSTURES:
            opener = best.id
    return binding


def _candidates(
    db: ScriptDatabase, retrieved: Sequence[Tuple[str, float]]
) -> List[Candidate]:
    seen: Dict[str, Candidate] = {}
    for script_id, sim in retrieved:
        if script_id in seen:
            continue
        script = db.get(script_id)
        seen[script_id] = Candidate(
            id=script_id,
            summary=script.summary,
            style=script.style_label,
            similarity=sim,
            categories=script_categories(script),
            n_keyframes=len(script.keyframes),
        )
    return list(seen.values())


def _missing_categories(candidates: Sequence[Candidate], available: Sequence[str]) -> List[str]:
    present = set(available)
    return sorted({c for cand in candidates for c in cand.categories if c not in present})


def assemble_long_script(
    db: ScriptDatabase,
    retrieved: Sequence[Tuple[str, float]],
    scene: Scene,
    narrator: Optional[NarrativeProvider] = None,
    theme: str = "",
    max_scripts: int = 5,
    keyframe_budget: int = 20,
) -> LongScript:
    """Pick, order and concatenate retrieved scripts into a bound LongScript."""
    if not retrieved:
        raise ValueError("nothing retrieved to assemble")
    candidates = _candidates(db, retrieved)
    available = _available_refs(scene)
    compatible = [c for c in candidates if set(c.categories) <= set(available)]
    if not compatible:
        raise UnsatisfiablePlanError(_missing_categories(candidates, available))

    def greedy() -> Composition:
        return Composition(
            selected_ids=greedy_selection(candidates, available, max_scripts, keyframe_budget)
        )

    def from_provider() -> Composition:
        assert narrator is not None
        answer = narrator.compose(theme, candidates, scene.synopsis())
        allowed = {c.id for c in compatible}
        ids = [i for i in dict.fromkeys(answer.selected_ids) if i in allowed]
        if not ids:
            raise ValueError("provider selected no scene-compatible script")
        return Composition(selected_ids=ids, prose=answer.prose)

    if narrator is None or isinstance(narrator, DeterministicNarrator):
        composition = greedy()
    else:
        composition = BaseAgent("Composer").with_fallback("compose", from_provider, greedy)

    concatenated: List[Keyframe] = []
    owners: List[str] = []
    for script_id in composition.selected_ids:
        for kf in db.get(script_id).keyframes:
            concatenated.append(kf)
            owners.append(script_id)

    tracked = insert_transitions_tracked(concatenated)
    keyframes = [kf for kf, _ in tracked]
    spans: Dict[str, List[int]] = {}
    for out_index, (_, source) in enumerate(tracked):
        if source is None:
            continue
        span = spans.setdefault(owners[source], [out_index, out_index])
        span[1] = out_index
    provenance = [
        Provenance(script_id=sid, start=spans[sid][0], end=spans[sid][1])
        for sid in composition.selected_ids
        if sid in spans
    ]
    return LongScript(
        theme=theme,
        keyframes=keyframes,
        provenance=provenance,
        scene_binding=bind_objects(keyframes, scene),
        prose=composition.prose,
    )


class ScriptPlannerAgent(BaseAgent):
    """Runs select_styles, retrieve and assemble for a theme and a scene."""

    def __init__(
        self,
        db: ScriptDatabase,
        provider: EmbeddingProvider,
        narrator: Optional[NarrativeProvider] = None,
        m: int = DEFAULT_M,
        k: int = DEFAULT_K,
    ):
        """Initialize the planner."""
        super().__init__("ScriptPlanner")
        self.db = db
        self.provider = provider
        self.narrator = narrator
        self.m = m
        self.k = k

    def plan(self, theme_text: str, scene: Scene) -> LongScript:
        """Plan a long script for a theme in a scene."""
        theme = Theme(theme_text)
        styles = select_styles(theme, self.m, self.provider, self.narrator)
        self.log_info(f"Selected styles: {', '.join(s.value for s in styles)}")
        retrieved = retrieve(self.db, theme, styles, self.k, self.provider)
        self.log_info(f"Retrieved {len(retrieved)} short scripts")
        if not retrieved:
            self.log_error("No short scripts stored for the selected styles")
            raise UnsatisfiablePlanError([])
        script = assemble_long_script(
            self.db, retrieved, scene, self.narrator, theme=theme.text
        )
        self.log_info(
            f"Assembled long script: {len(script.keyframes)} keyframes "
            f"from {len(script.provenance)} short scripts"
        )
        return script
