"""Style-reward slot: a provider interface plus a deterministic stand-in."""

import logging
from collections import Counter
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from embedding.providers import test_embed
from embedding.vectors import cosine_similarity, normalize
from skills.character import CharacterState

logger = logging.getLogger(__name__)

SPEED_BIN = 0.5


@runtime_checkable
class StyleRewardProvider(Protocol):
    """Scores a window of recent states against a style embedding, in [0, 1]."""

    def style_reward(self, window: Sequence[CharacterState], z: np.ndarray) -> float:
        ...


def clamp01(value: float) -> float:
    return max(0.0, min(1.0, value))


def window_signature(window: Sequence[CharacterState]) -> str:
    """Coarse text summary of a motion window: modal posture and speed bin."""
    if not window:
        return "empty"
    postures = Counter(s.posture.value for s in window)
    posture = max(postures.items(), key=lambda kv: kv[1])[0]
    speed = float(np.mean([np.linalg.norm(s.root_vel[:2]) for s in window]))
    return f"{posture}:{int(speed // SPEED_BIN)}"


def stub_style_reward(window: Sequence[CharacterState], z: np.ndarray) -> float:
    """0.5 + 0.5 * cos(embed(signature), z), clamped; 0.5 for a zero z."""
    z = np.asarray(z, dtype=np.float64)
    if not np.any(z):
        return 0.5
    signature = test_embed(window_signature(window), dim=len(z))
    return clamp01(0.5 + 0.5 * cosine_similarity(signature, normalize(z)))


class StubStyleReward:
    """StyleRewardProvider backed by stub_style_reward."""

    def style_reward(self, window: Sequence[CharacterState], z: np.ndarray) -> float:
        """Score the window against z."""
        return stub_style_reward(window, z)
