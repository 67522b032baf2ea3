"""Skill-tuple grammar and transition insertion for long scripts."""

from typing import List, Optional, Sequence, Tuple

from data_store.models import Keyframe, SkillId, StyleLabel

SKILL_TUPLES: Tuple[Tuple[SkillId, ...], ...] = (
    (SkillId.SIT, SkillId.GETUP),
    (SkillId.LIE, SkillId.GETUP),
    (SkillId.IDLE,),
    (SkillId.WALK, SkillId.CARRY),
    (SkillId.WALK, SkillId.REACH),
)

TRANSITION_TOKEN = SkillId.WALK
OPEN_POSTURES = frozenset({SkillId.SIT, SkillId.LIE})
NEEDS_APPROACH = frozenset({SkillId.SIT, SkillId.LIE, SkillId.REACH, SkillId.CARRY})
INTERACTIONS = frozenset({SkillId.GETUP, SkillId.REACH, SkillId.CARRY})


def validate_skill_sequence(seq: Sequence[SkillId]) -> bool:
    """True iff seq splits into skill tuples with free Walk tokens between them."""
    skills = list(seq)
    n = len(skills)
    reachable = [False] * (n + 1)
    reachable[0] = True
    for i in range(n):
        if not reachable[i]:
            continue
        if skills[i] is TRANSITION_TOKEN:
            reachable[i + 1] = True
        for tup in SKILL_TUPLES:
            end = i + len(tup)
            if end <= n and tuple(skills[i:end]) == tup:
                reachable[end] = True
    return reachable[n]


def transition_walk(target: Keyframe) -> Keyframe:
    """Neutral Walk toward the object of the keyframe that follows it."""
    return Keyframe(skill=SkillId.WALK, object_ref=target.object_ref, style=StyleLabel.NEUTRAL)


def closing_getup(opener: Keyframe) -> Keyframe:
    """GetUp on the object a Sit or Lie keyframe occupies."""
    return Keyframe(skill=SkillId.GETUP, object_ref=opener.object_ref)


def insert_transitions_tracked(
    seq: Sequence[Keyframe],
) -> List[Tuple[Keyframe, Optional[int]]]:
    """insert_transitions, pairing each output keyframe with its input index.

    Inserted keyframes carry None. GetUps that close nothing are dropped and a
    Sit or Lie left open is closed by an inserted GetUp.
    """
    out: List[Tuple[Keyframe, Optional[int]]] = []

    def previous() -> Optional[Keyframe]:
        return out[-1][0] if out else None

    for index, kf in enumerate(seq):
        prev = previous()
        if kf.skill is SkillId.GETUP:
            if prev is not None and prev.skill in OPEN_POSTURES:
                out.append((kf, index))
            continue
        if prev is not None and prev.skill in OPEN_POSTURES:
            out.append((closing_getup(prev), None))
            prev = previous()
        approach = kf.skill in NEEDS_APPROACH or (
            kf.skill is SkillId.IDLE and prev is not None and prev.skill in INTERACTIONS
        )
        if approach and (prev is None or prev.skill is not SkillId.WALK):
            out.append((transition_walk(kf), None))
        out.append((kf, index))
    last = previous()
    if last is not None and last.skill in OPEN_POSTURES:
        out.append((closing_getup(last), None))
    return out


def insert_transitions(seq: Sequence[Keyframe]) -> List[Keyframe]:
    """Insert Neutral Walks before tuple openings that lack one."""
    return [kf for kf, _ in insert_transitions_tracked(seq)]
