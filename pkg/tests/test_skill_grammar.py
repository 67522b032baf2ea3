"""Tests for the skill-tuple grammar and transition insertion."""

import itertools
import re

import pytest

from agents.skill_grammar import insert_transitions, validate_skill_sequence
from data_store.models import OBJECT_SKILLS, Keyframe, SkillId, StyleLabel

LETTERS = {
    SkillId.WALK: "W",
    SkillId.IDLE: "I",
    SkillId.SIT: "S",
    SkillId.LIE: "L",
    SkillId.GETUP: "G",
    SkillId.REACH: "R",
    SkillId.CARRY: "C",
}
GRAMMAR = re.compile(r"(?:SG|LG|I|WC|WR|W)*")


def grammar_accepts(seq):
    """Independent oracle: tuples as a regular language with free Walks."""
    return GRAMMAR.fullmatch("".join(LETTERS[s] for s in seq)) is not None


def keyframes_for(seq):
    """Keyframes for a skill sequence, objects where required."""
    return [
        Keyframe(skill=s, object_ref="sofa" if s in OBJECT_SKILLS else None) for s in seq
    ]


def all_sequences(max_len=4):
    for length in range(max_len + 1):
        yield from itertools.product(list(SkillId), repeat=length)


class TestValidateSkillSequence:
    """Grammar acceptance."""

    @pytest.mark.parametrize(
        "seq, expected",
        [
            ([SkillId.SIT, SkillId.GETUP], True),
            ([SkillId.WALK, SkillId.SIT, SkillId.GETUP, SkillId.WALK, SkillId.CARRY], True),
            ([SkillId.SIT, SkillId.LIE], False),
            ([SkillId.REACH], False),
            ([SkillId.IDLE, SkillId.WALK, SkillId.WALK], True),
            ([], True),
        ],
    )
    def test_examples(self, seq, expected):
        """Hand-checked sequences."""
        assert validate_skill_sequence(seq) is expected

    def test_agrees_with_enumerator(self):
        """Every sequence of length <= 4 over the seven skills."""
        checked = 0
        for seq in all_sequences(4):
            assert validate_skill_sequence(seq) == grammar_accepts(seq), seq
            checked += 1
        assert checked == sum(7**n for n in range(5))


class TestInsertTransitions:
    """Walk insertion and posture closing."""

    def test_sit_getup(self):
        """A Walk toward the seat is inserted."""
        out = insert_transitions(keyframes_for([SkillId.SIT, SkillId.GETUP]))
        assert [k.skill for k in out] == [SkillId.WALK, SkillId.SIT, SkillId.GETUP]
        assert out[0].object_ref == "sofa"
        assert out[0].style is StyleLabel.NEUTRAL

    def test_existing_walk_is_kept(self):
        """Already-valid input is unchanged."""
        seq = keyframes_for([SkillId.WALK, SkillId.SIT, SkillId.GETUP])
        assert insert_transitions(seq) == seq

    def test_knock_then_sit(self):
        """Walks appear before the reach and the sit only; the sit is closed."""
        seq = [
            Keyframe(skill="walk", caption="stomping", style="angry"),
            Keyframe(skill="idle", caption="arms crossed", style="angry"),
            Keyframe(skill="reach", object_ref="table"),
            Keyframe(skill="sit", object_ref="chair", caption="slump", style="angry"),
        ]
        out = insert_transitions(seq)
        assert [(k.skill, k.object_ref) for k in out] == [
            (SkillId.WALK, None),
            (SkillId.IDLE, None),
            (SkillId.WALK, "table"),
            (SkillId.REACH, "table"),
            (SkillId.WALK, "chair"),
            (SkillId.SIT, "chair"),
            (SkillId.GETUP, "chair"),
        ]

    def test_idle_after_interaction_gets_walk(self):
        """Idle following Reach is preceded by a Walk; a leading Idle is not."""
        out = insert_transitions(keyframes_for([SkillId.IDLE, SkillId.REACH, SkillId.IDLE]))
        assert [k.skill for k in out] == [
            SkillId.IDLE,
            SkillId.WALK,
            SkillId.REACH,
            SkillId.WALK,
            SkillId.IDLE,
        ]

    def test_stray_getup_dropped(self):
        """GetUp without an open Sit or Lie disappears."""
        out = insert_transitions(keyframes_for([SkillId.GETUP, SkillId.IDLE]))
        assert [k.skill for k in out] == [SkillId.IDLE]

    def test_output_valid_and_idempotent_for_all_short_inputs(self):
        """Any input yields a grammatical sequence that a second pass leaves alone."""
        for seq in all_sequences(4):
            once = insert_transitions(keyframes_for(seq))
            assert validate_skill_sequence([k.skill for k in once]), seq
            assert insert_transitions(once) == once, seq
