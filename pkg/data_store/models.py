"""Short-script data model and structural validation."""

import logging
from collections import Counter
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)


class SkillId(str, Enum):
    """The seven skills a keyframe can schedule."""

    WALK = "walk"
    IDLE = "idle"
    SIT = "sit"
    LIE = "lie"
    GETUP = "getup"
    REACH = "reach"
    CARRY = "carry"


class StyleLabel(str, Enum):
    """Neutral plus eight motion styles."""

    NEUTRAL = "neutral"
    HAPPY = "happy"
    ANGRY = "angry"
    HURRIED = "hurried"
    TIRED = "tired"
    SAD = "sad"
    STRESSED = "stressed"
    DRUNK = "drunk"
    RELAXED = "relaxed"


SKILL_ALIASES: Dict[str, SkillId] = {
    "loco": SkillId.WALK,
    "locomotion": SkillId.WALK,
    "touch": SkillId.REACH,
    "sitdown": SkillId.SIT,
    "sit_down": SkillId.SIT,
    "liedown": SkillId.LIE,
    "lie_down": SkillId.LIE,
    "get_up": SkillId.GETUP,
    "standup": SkillId.GETUP,
}

STYLE_ALIASES: Dict[str, StyleLabel] = {
    "anxious": StyleLabel.HURRIED,
    "excited": StyleLabel.HAPPY,
}

OBJECT_SKILLS = frozenset(
    {SkillId.SIT, SkillId.LIE, SkillId.REACH, SkillId.CARRY, SkillId.GETUP}
)
UNCONDITIONED_SKILLS = frozenset({SkillId.REACH, SkillId.GETUP})


def parse_skill(value: Any) -> SkillId:
    """Parse a skill name, accepting aliases and any letter case."""
    if isinstance(value, SkillId):
        return value
    key = str(value).strip().lower()
    if key in SKILL_ALIASES:
        return SKILL_ALIASES[key]
    return SkillId(key)


def parse_style(value: Any) -> StyleLabel:
    """Parse a style label, accepting aliases and any letter case."""
    if isinstance(value, StyleLabel):
        return value
    key = str(value).strip().lower()
    if key in STYLE_ALIASES:
        return STYLE_ALIASES[key]
    return StyleLabel(key)


def _blank_to_none(value: Any) -> Any:
    if isinstance(value, str) and not value.strip():
        return None
    return value


class Keyframe(BaseModel):
    """One planned behavior unit: skill, object category, caption and style."""

    model_config = ConfigDict(populate_by_name=True, frozen=True, extra="forbid")

    skill: SkillId
    object_ref: Optional[str] = Field(default=None, alias="object")
    caption: Optional[str] = None
    style: Optional[StyleLabel] = None

    @field_validator("skill", mode="before")
    @classmethod
    def _parse_skill(cls, value: Any) -> SkillId:
        return parse_skill(value)

    @field_validator("style", mode="before")
    @classmethod
    def _parse_style(cls, value: Any) -> Optional[StyleLabel]:
        value = _blank_to_none(value)
        return None if value is None else parse_style(value)

    @field_validator("object_ref", "caption", mode="before")
    @classmethod
    def _strip_blank(cls, value: Any) -> Any:
        value = _blank_to_none(value)
        return value.strip() if isinstance(value, str) else value

    def to_record(self) -> Dict[str, Any]:
        """Serialize with the on-disk field names."""
        return self.model_dump(mode="json", by_alias=True)


class ShortScript(BaseModel):
    """A few keyframes plus a one-sentence summary and a style label."""

    model_config = ConfigDict(extra="forbid")

    id: Optional[str] = None
    keyframes: List[Keyframe] = Field(default_factory=list)
    summary: str = ""
    style_label: StyleLabel = StyleLabel.NEUTRAL

    @field_validator("style_label", mode="before")
    @classmethod
    def _parse_label(cls, value: Any) -> StyleLabel:
        return parse_style(value)

    def to_record(self) -> Dict[str, Any]:
        """Serialize with the on-disk field names."""
        return {
            "id": self.id,
            "summary": self.summary,
            "style_label": self.style_label.value,
            "keyframes": [kf.to_record() for kf in self.keyframes],
        }


class ValidityReport(BaseModel):
    """Outcome of a validation pass; empty violations means ok."""

    violations: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True when no invariant is violated."""
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def modal_style(keyframes: Sequence[Keyframe]) -> StyleLabel:
    """Most frequent non-neutral keyframe style; ties go to the first seen."""
    styles = [
        kf.style
        for kf in keyframes
        if kf.style is not None and kf.style is not StyleLabel.NEUTRAL
    ]
    if not styles:
        return StyleLabel.NEUTRAL
    counts = Counter(styles)
    best = max(counts.values())
    for style in styles:
        if counts[style] == best:
            return style
    return StyleLabel.NEUTRAL


def validate_keyframe(kf: Keyframe) -> ValidityReport:
    """Check the keyframe invariants without raising."""
    violations = []
    if kf.skill in OBJECT_SKILLS and not kf.object_ref:
        violations.append(f"{kf.skill.value}: missing object_ref")
    if kf.skill in UNCONDITIONED_SKILLS:
        if kf.caption is not None:
            violations.append(f"{kf.skill.value}: caption not allowed")
        if kf.style is not None:
            violations.append(f"{kf.skill.value}: style not allowed")
    if kf.caption is not None and kf.style is None:
        violations.append(f"{kf.skill.value}: caption without style")
    return ValidityReport(violations=violations)


def validate_short_script(script: ShortScript) -> ValidityReport:
    """Check every keyframe, the summary and the style label consistency."""
    violations = []
    if not script.keyframes:
        violations.append("keyframes: empty")
    for index, kf in enumerate(script.keyframes):
        for violation in validate_keyframe(kf).violations:
            violations.append(f"keyframes[{index}] {violation}")
    if not script.summary.strip():
        violations.append("summary: empty")
    expected = modal_style(script.keyframes)
    if script.keyframes and script.style_label is not expected:
        violations.append(
            f"style_label: {script.style_label.value} != modal style {expected.value}"
        )
    return ValidityReport(violations=violations)
