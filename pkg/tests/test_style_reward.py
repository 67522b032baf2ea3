"""Tests for the stand-in style reward."""

import numpy as np
import pytest

from embedding.providers import test_embed
from skills.character import Posture, make_state, standing_state
from skills.style_reward import (
    StubStyleReward,
    StyleRewardProvider,
    stub_style_reward,
    window_signature,
)


@pytest.fixture
def window():
    return [standing_state((0.1 * i, 0.0), 0.0) for i in range(5)]


class TestStubStyleReward:
    """0.5 + 0.5 cos, clamped."""

    def test_signature(self, window):
        """Modal posture and speed bin."""
        assert window_signature(window) == "standing:0"
        assert window_signature([]) == "empty"

    def test_aligned(self, window):
        """z equal to the signature embedding scores 1."""
        z = test_embed(window_signature(window))
        assert stub_style_reward(window, z) == pytest.approx(1.0)

    def test_antipodal(self, window):
        """The opposite direction scores 0."""
        z = -test_embed(window_signature(window))
        assert stub_style_reward(window, z) == pytest.approx(0.0)

    def test_orthogonal(self, window):
        """An orthogonal z scores 0.5."""
        s = test_embed(window_signature(window))
        v = test_embed("unrelated")
        z = v - np.dot(v, s) * s
        assert stub_style_reward(window, z) == pytest.approx(0.5)

    def test_zero_latent(self, window):
        """A zero z is neutral."""
        assert stub_style_reward(window, np.zeros(64)) == 0.5

    def test_range(self):
        """Random windows and latents stay in [0, 1]."""
        rng = np.random.default_rng(1)
        for _ in range(200):
            posture = list(Posture)[int(rng.integers(3))]
            states = [
                make_state(np.append(rng.uniform(0, 5, 2), 0.9), rng.uniform(-2, 2, 3), 0.0, posture)
                for _ in range(4)
            ]
            value = stub_style_reward(states, rng.normal(size=64))
            assert 0.0 <= value <= 1.0

    def test_provider_protocol(self, window):
        """The stub satisfies the provider protocol."""
        provider = StubStyleReward()
        assert isinstance(provider, StyleRewardProvider)
        z = test_embed(window_signature(window))
        assert provider.style_reward(window, z) == pytest.approx(1.0)
