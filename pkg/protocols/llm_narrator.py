"""Narrative provider backed by a local LLM through LiteLLM."""

import json
import logging
import os
from typing import Any, List, Optional, Sequence

import litellm
from dotenv import load_dotenv

from agents.narrative import Candidate, Composition, Generation, SceneSynopsis
from data_store.errors import ProviderError
from data_store.models import Keyframe, StyleLabel

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

STYLE_PROMPT = (
    "Theme: {theme}\n"
    "Available styles: {styles}\n"
    "Pick the {m} styles most relevant to the theme. "
    'Answer with JSON only: {{"styles": [...]}}'
)

COMPOSE_PROMPT = (
    "Theme: {theme}\n"
    "Scene objects (category, count, room): {synopsis}\n"
    "Candidate short scripts:\n{summaries}\n"
    "Choose and order the scripts that combine into a fluent story in this scene. "
    'Answer with JSON only: {{"selected_ids": [...], "prose": "..."}}'
)

GENERATE_PROMPT = (
    "Theme: {theme}\n"
    "Scene objects (category, count, room): {synopsis}\n"
    "Available skills (skill on object): {skills}\n"
    "Write one long script of at most {n} keyframes for the theme in this scene, "
    "using only the skills and objects listed. "
    "Give each keyframe a style from: {styles}. "
    'Answer with JSON only: {{"keyframes": [{{"skill": "...", "object": "...", '
    '"caption": "...", "style": "..."}}], "prose": "..."}}'
)


def _extract_json(text: str) -> Any:
    """First JSON object embedded in a model answer."""
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end <= start:
        raise ProviderError("LLM answer contains no JSON object")
    try:
        return json.loads(text[start : end + 1])
    except json.JSONDecodeError as e:
        raise ProviderError(f"LLM answer is not valid JSON: {e}") from e


def _synopsis_text(synopsis: SceneSynopsis) -> str:
    return "; ".join(f"{cat} x{n} ({room or 'any'})" for cat, n, room in synopsis)


class LiteLlmNarrativeProvider:
    """Prompts an LLM to select styles, compose scripts or generate one directly."""

    def __init__(self, model: Optional[str] = None, api_base: Optional[str] = None):
        """Initialize the provider from arguments or LLM_MODEL / LLM_API_BASE."""
        self.model = model or os.getenv("LLM_MODEL", "")
        if not self.model:
            raise ProviderError("no LLM model configured")
        self.api_base = api_base or os.getenv("LLM_API_BASE", "http://localhost:11434")
        litellm.set_verbose = False

    def _complete(self, prompt: str) -> Any:
        try:
            response = litellm.completion(
                model=self.model,
                messages=[{"role": "user", "content": prompt}],
                api_base=self.api_base,
                api_key="ollama",
                temperature=0,
            )
        except Exception as e:
            logger.error(f"LLM completion failed: {e}")
            raise ProviderError(f"LLM completion failed: {e}") from e
        return _extract_json(response.choices[0].message.content or "")

    def select_styles(self, theme: str, styles: Sequence[str], m: int) -> List[str]:
        """Styles named by the model, lower-cased, at most m."""
        answer = self._complete(STYLE_PROMPT.format(theme=theme, styles=", ".join(styles), m=m))
        chosen = answer.get("styles") if isinstance(answer, dict) else None
        if not isinstance(chosen, list):
            raise ProviderError("LLM answer lacks a styles list")
        return [str(s).strip().lower() for s in chosen][:m]

    def compose(
        self, theme: str, candidates: Sequence[Candidate], synopsis: SceneSynopsis
    ) -> Composition:
        """Ordered script ids (and prose) chosen by the model."""
        summaries = "\n".join(f"- {c.id}: {c.summary}" for c in candidates)
        objects = _synopsis_text(synopsis)
        answer = self._complete(
            COMPOSE_PROMPT.format(theme=theme, synopsis=objects, summaries=summaries)
        )
        selected = answer.get("selected_ids") if isinstance(answer, dict) else None
        if not isinstance(selected, list):
            raise ProviderError("LLM answer lacks selected_ids")
        prose = answer.get("prose")
        return Composition(
            selected_ids=[str(i) for i in selected],
            prose=prose if isinstance(prose, str) else None,
        )

    def generate(
        self,
        theme: str,
        skills: Sequence[Keyframe],
        synopsis: SceneSynopsis,
        n_keyframes: int,
    ) -> Generation:
        """Keyframes written by the model straight from the skill list."""
        entries = "; ".join(
            f"{kf.skill.value} {kf.object_ref}" if kf.object_ref else kf.skill.value
            for kf in skills
        )
        objects = _synopsis_text(synopsis)
        answer = self._complete(
            GENERATE_PROMPT.format(
                theme=theme,
                synopsis=objects,
                skills=entries,
                n=n_keyframes,
                styles=", ".join(s.value for s in StyleLabel),
            )
        )
        records = answer.get("keyframes") if isinstance(answer, dict) else None
        if not isinstance(records, list):
            raise ProviderError("LLM answer lacks a keyframes list")
        prose = answer.get("prose")
        return Generation(
            keyframes=[Keyframe.model_validate(r) for r in records],
            prose=prose if isinstance(prose, str) else None,
        )
