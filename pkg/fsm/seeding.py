"""Seeded random streams for episodes.

Each episode gets a base seed; spawn sampling and goal sampling draw from
independent sub-streams keyed by a stable tag, so adding draws to one never
shifts the other.
"""

import zlib

import numpy as np

SPAWN_TAG = "spawn"
GOALS_TAG = "goals"


def tag_seed(tag: str) -> int:
    """Stable 32-bit seed for a tag; never Python's per-process hash()."""
    return zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF


def derive_rng(seed: int, tag: str) -> np.random.Generator:
    """Independent generator for (episode seed, tag)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, tag_seed(tag)])


def episode_seeds(base_seed: int, episodes: int) -> list:
    """Per-episode seeds: base seed plus the episode index."""
    return [base_seed + i for i in range(episodes)]
