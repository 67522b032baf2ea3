"""Narrative providers: style selection, script composition and direct generation.

DeterministicNarrator is the offline fallback used whenever no LLM or HTTP
provider is configured, or when one fails.
"""

import logging
from typing import List, Optional, Protocol, Sequence, Tuple, runtime_checkable

from pydantic import BaseModel, Field

from agents.skill_grammar import insert_transitions
from data_store.models import Keyframe, SkillId, StyleLabel
from embedding.providers import EmbeddingProvider
from embedding.vectors import cosine_similarity

logger = logging.getLogger(__name__)

DEFAULT_MAX_SCRIPTS = 5
DEFAULT_KEYFRAME_BUDGET = 20


class Candidate(BaseModel):
    """A retrieved short script as shown to a narrative provider."""

    id: str
    summary: str
    style: StyleLabel
    similarity: float
    categories: List[str] = Field(default_factory=list)
    n_keyframes: int = 0


class Composition(BaseModel):
    """Ordered script ids chosen by a provider, plus optional prose."""

    selected_ids: List[str] = Field(default_factory=list)
    prose: Optional[str] = None


class Generation(BaseModel):
    """Keyframes written directly by a provider, without retrieval."""

    keyframes: List[Keyframe] = Field(default_factory=list)
    prose: Optional[str] = None


SceneSynopsis = Sequence[Tuple[str, int, str]]

# Round-robin order of the deterministic tour.
TOUR_ORDER = (SkillId.SIT, SkillId.REACH, SkillId.CARRY, SkillId.LIE, SkillId.IDLE)


@runtime_checkable
class NarrativeProvider(Protocol):
    """Chooses styles for a theme and composes retrieved scripts into a plan."""

    def select_styles(self, theme: str, styles: Sequence[str], m: int) -> List[str]:
        ...

    def compose(
        self, theme: str, candidates: Sequence[Candidate], synopsis: SceneSynopsis
    ) -> Composition:
        ...

    def generate(
        self,
        theme: str,
        skills: Sequence[Keyframe],
        synopsis: SceneSynopsis,
        n_keyframes: int,
    ) -> Generation:
        ...


def rank_styles(
    theme: str, styles: Sequence[str], provider: EmbeddingProvider
) -> List[Tuple[str, float]]:
    """Styles by descending similarity to the theme; ties keep input order."""
    query = provider.embed(theme)
    scored = [(s, cosine_similarity(query, provider.embed(s))) for s in styles]
    return sorted(scored, key=lambda item: -item[1])


def greedy_selection(
    candidates: Sequence[Candidate],
    available: Sequence[str],
    max_scripts: int = DEFAULT_MAX_SCRIPTS,
    keyframe_budget: int = DEFAULT_KEYFRAME_BUDGET,
) -> List[str]:
    """Scene-compatible candidates by descending similarity within the budget."""
    present = set(available)
    ordered = sorted(candidates, key=lambda c: (-c.similarity, c.id))
    chosen: List[str] = []
    used = 0
    for cand in ordered:
        if len(chosen) >= max_scripts:
            break
        if cand.id in chosen or not set(cand.categories) <= present:
            continue
        if chosen and used + cand.n_keyframes > keyframe_budget:
            continue
        chosen.append(cand.id)
        used += cand.n_keyframes
    return chosen


def tour(skills: Sequence[Keyframe]) -> List[Keyframe]:
    """Skill entries interleaved in TOUR_ORDER, one of each skill per round."""
    queues = [[kf for kf in skills if kf.skill is skill] for skill in TOUR_ORDER]
    rounds = max((len(q) for q in queues), default=0)
    return [q[r] for r in range(rounds) for q in queues if r < len(q)]


class DeterministicNarrator:
    """Embedding-ranked styles and greedy composition, no prose."""

    def __init__(
        self,
        provider: EmbeddingProvider,
        max_scripts: int = DEFAULT_MAX_SCRIPTS,
        keyframe_budget: int = DEFAULT_KEYFRAME_BUDGET,
    ):
        """Initialize the narrator around an embedding provider."""
        self.provider = provider
        self.max_scripts = max_scripts
        self.keyframe_budget = keyframe_budget

    def select_styles(self, theme: str, styles: Sequence[str], m: int) -> List[str]:
        """Top-m styles by cosine similarity to the theme."""
        return [s for s, _ in rank_styles(theme, styles, self.provider)[:m]]

    def compose(
        self, theme: str, candidates: Sequence[Candidate], synopsis: SceneSynopsis
    ) -> Composition:
        """Greedy selection over the candidates compatible with the scene."""
        available = [category for category, _, _ in synopsis]
        ids = greedy_selection(candidates, available, self.max_scripts, self.keyframe_budget)
        logger.debug(f"Greedy composition picked {len(ids)} of {len(candidates)} scripts")
        return Composition(selected_ids=ids)

    def generate(
        self,
        theme: str,
        skills: Sequence[Keyframe],
        synopsis: SceneSynopsis,
        n_keyframes: int,
    ) -> Generation:
        """Round-robin tour of the skill list, ignoring the theme.

        Entries are added while the script, with transitions inserted,
        stays within n_keyframes.
        """
        chosen: List[Keyframe] = []
        for candidate in tour(skills):
            if len(insert_transitions(chosen + [candidate])) > n_keyframes:
                break
            chosen.append(candidate)
        logger.debug(f"Direct tour wrote {len(chosen)} of {len(skills)} skill entries")
        return Generation(keyframes=chosen)
