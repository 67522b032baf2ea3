"""Script diversity as mean pairwise embedding similarity."""

import logging
from itertools import combinations
from typing import List, Sequence

import numpy as np

from agents.script_planner import LongScript
from data_store.errors import MetricInputError
from embedding.providers import EmbeddingProvider
from embedding.vectors import cosine_similarity

logger = logging.getLogger(__name__)


def script_text(script: LongScript) -> str:
    """Prose if the planner produced one, else the keyframes spelled out."""
    if script.prose:
        return script.prose
    parts: List[str] = []
    for kf in script.keyframes:
        words = [kf.skill.value]
        if kf.object_ref:
            words.append(kf.object_ref)
        if kf.caption:
            words.append(kf.caption)
        parts.append(" ".join(words))
    return "; ".join(parts)


def script_diversity(texts: Sequence[str], provider: EmbeddingProvider) -> float:
    """Mean cosine similarity over unordered pairs; lower is more diverse."""
    if len(texts) < 2:
        raise MetricInputError(f"diversity needs at least 2 texts, got {len(texts)}")
    vectors = [provider.embed(t) for t in texts]
    sims = [cosine_similarity(a, b) for a, b in combinations(vectors, 2)]
    value = float(np.mean(sims))
    logger.debug(f"Diversity over {len(texts)} texts: {value:.4f}")
    return value
