"""Tests for goal construction."""

import itertools
import math

import numpy as np
import pytest

from data_store.errors import InfeasibleGoalError
from data_store.models import SkillId
from skills.character import HANDS, JointId, standing_state
from tasks.goals import (
    make_approach_goal,
    make_doi_goal,
    make_getup_goal,
    make_hsi_goal,
    make_loco_goal,
)


def scan_nearest(part, q):
    """Linear scan oracle."""
    best, best_d = None, math.inf
    for p in part:
        d = math.dist(p, q)
        if d < best_d:
            best, best_d = p, d
    return np.asarray(best), best_d


class TestLocoGoal:
    """Walk and Idle targets."""

    def test_idle_keeps_root(self):
        """Idle anchors at the current root."""
        goal = make_loco_goal(standing_state((2.0, 3.0), 0.0), SkillId.IDLE, np.random.default_rng(0))
        assert np.array_equal(goal.target, [2.0, 3.0])
        assert goal.target_speed == 0.0
        assert goal.mode is SkillId.IDLE

    def test_walk_targets_are_far_enough(self, apartment):
        """Walk targets are at least 1 m away, inside bounds and clear of objects."""
        state = standing_state(apartment.spawn_hint, 0.0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            goal = make_loco_goal(state, SkillId.WALK, rng, scene=apartment, clearance=0.3)
            assert math.dist(goal.target, state.root_pos[:2]) >= 1.0
            assert apartment.contains_xy(goal.target)
            assert apartment.clearance_ok(goal.target, 0.3)
            assert goal.target_speed == 1.5

    def test_walk_reproducible(self):
        """Same seed, same target."""
        state = standing_state((0.0, 0.0), 0.0)
        a = make_loco_goal(state, SkillId.WALK, np.random.default_rng(9))
        b = make_loco_goal(state, SkillId.WALK, np.random.default_rng(9))
        assert np.array_equal(a.target, b.target)
        assert np.all(np.abs(a.target) <= 5.0)

    def test_non_locomotion_skill(self):
        """Only Walk and Idle have locomotion goals."""
        with pytest.raises(ValueError):
            make_loco_goal(standing_state((0, 0), 0.0), SkillId.SIT, np.random.default_rng(0))

    def test_approach_goal(self, apartment):
        """The grown footprint's nearest point; inside it the root itself."""
        goal = make_approach_goal(apartment, "chair", standing_state((5.0, 4.0), 0.0), 0.4)
        assert goal.target == pytest.approx([6.35, 1.85])
        assert goal.object_id == "chair"
        inside = make_approach_goal(apartment, "chair", standing_state((6.5, 1.2), 0.0), 0.4)
        assert inside.target == pytest.approx([6.5, 1.2])


class TestHsiGoal:
    """Nearest-point contact targets."""

    def test_matches_linear_scan(self, apartment):
        """Pelvis 2 m from the chair targets the scanned nearest top point."""
        state = standing_state((5.0, 1.2), 0.0)
        goal = make_hsi_goal(apartment, "chair", "top", JointId.PELVIS, state)
        expected, _ = scan_nearest(apartment.get("chair").part("top"), state.pelvis)
        assert np.array_equal(goal.target, expected)
        assert goal.part_ref == "top"
        assert goal.joint is JointId.PELVIS

    def test_joint_on_part_point(self, apartment):
        """A joint already on a part point targets that point."""
        top = apartment.get("table").part("top")
        state = standing_state((7.0, 2.4), 0.0).with_joint(JointId.LEFT_HAND, top[5])
        goal = make_hsi_goal(apartment, "table", "top", JointId.LEFT_HAND, state)
        assert np.array_equal(goal.target, top[5])

    def test_reach_picks_nearer_hand(self, apartment):
        """No joint given: the hand with the smaller scanned distance."""
        part = apartment.get("shelf").part("surface")
        for xy, yaw in [((1.5, 2.3), 0.0), ((1.5, 1.7), 0.0), ((0.5, 3.2), -np.pi / 2)]:
            state = standing_state(xy, yaw)
            dists = {hand: scan_nearest(part, state.joint(hand))[1] for hand in HANDS}
            goal = make_hsi_goal(apartment, "shelf", "surface", None, state)
            assert goal.joint is min(HANDS, key=lambda h: dists[h])

    def test_missing_part(self, apartment):
        """Unknown parts cannot be targeted."""
        with pytest.raises(InfeasibleGoalError):
            make_hsi_goal(apartment, "chair", "armrest", JointId.PELVIS, standing_state((5, 1), 0))

    def test_getup_standing_target(self, apartment):
        """The standing target sits just outside the footprint at standing height."""
        state = standing_state((7.0, 0.5), np.pi / 2)
        goal = make_getup_goal(apartment, "chair", "top", state, standing_height=0.9)
        assert goal.standing_target is not None
        assert goal.standing_target[2] == 0.9
        aabb = apartment.get("chair").aabb
        assert aabb.footprint_distance(goal.standing_target) == pytest.approx(0.3, abs=1e-6)
        assert goal.standing_target[1] < aabb.lo[1]


class TestDoiGoal:
    """Carry goals."""

    def test_corners_are_the_box(self, apartment):
        """Eight corners of the object box at its current root."""
        goal = make_doi_goal(apartment, "box", (5.0, 5.0), np.random.default_rng(0))
        expected = set(itertools.product((2.35, 2.65), (1.85, 2.15), (0.0, 0.3)))
        got = {tuple(round(float(v), 9) for v in c) for c in goal.bbox_corners}
        assert got == expected
        assert goal.target == pytest.approx([5.0, 5.0, 0.15])

    def test_corners_follow_moved_root(self, apartment):
        """A moved object reports corners at its new root."""
        goal = make_doi_goal(
            apartment, "box", (5.0, 5.0), np.random.default_rng(0), object_root=(3.5, 2.0, 0.15)
        )
        assert goal.bbox_corners[:, 0].min() == pytest.approx(3.35)

    def test_sampled_target(self, apartment):
        """Sampled targets are reproducible ground points away from the object."""
        a = make_doi_goal(apartment, "toy", None, np.random.default_rng(4))
        b = make_doi_goal(apartment, "toy", None, np.random.default_rng(4))
        assert np.array_equal(a.target, b.target)
        assert a.target[2] == pytest.approx(0.1)
        assert math.dist(a.target[:2], (6.0, 5.0)) >= 1.0
        assert apartment.contains_xy(a.target)

    def test_static_object(self, apartment):
        """Static objects cannot be carried."""
        with pytest.raises(InfeasibleGoalError):
            make_doi_goal(apartment, "sofa", (1.0, 1.0), np.random.default_rng(0))
