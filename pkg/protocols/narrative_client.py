"""HTTP client for an external narrative (style selection / composition) service."""

import asyncio
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import aiohttp
from dotenv import load_dotenv

from agents.narrative import Candidate, Composition, Generation, SceneSynopsis
from data_store.errors import ProviderError
from data_store.models import Keyframe

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class HttpNarrativeProvider:
    """NarrativeProvider backed by POST /select_styles, /compose and /generate."""

    def __init__(
        self,
        base_url: Optional[str] = None,
        timeout_s: Optional[float] = None,
        retries: Optional[int] = None,
    ):
        """Initialize the narrative client."""
        self.base_url = (base_url or os.getenv("NARRATIVE_ENDPOINT_URL", "")).rstrip("/")
        if not self.base_url:
            raise ProviderError("no narrative endpoint configured")
        self.timeout_s = float(
            timeout_s if timeout_s is not None else os.getenv("NARRATIVE_TIMEOUT_S", "10")
        )
        self.retries = int(
            retries if retries is not None else os.getenv("NARRATIVE_RETRIES", "2")
        )
        self.session: Optional[aiohttp.ClientSession] = None

    async def __aenter__(self) -> "HttpNarrativeProvider":
        """Async context manager entry."""
        self.session = aiohttp.ClientSession(
            timeout=aiohttp.ClientTimeout(total=self.timeout_s)
        )
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Async context manager exit."""
        if self.session:
            await self.session.close()
            self.session = None

    async def _make_request(self, endpoint: str, body: Dict[str, Any]) -> Dict[str, Any]:
        """POST a JSON body to an endpoint, retrying transport failures."""
        url = f"{self.base_url}/{endpoint}"
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                if self.session is not None:
                    return await self._post(self.session, url, body)
                async with aiohttp.ClientSession(
                    timeout=aiohttp.ClientTimeout(total=self.timeout_s)
                ) as session:
                    return await self._post(session, url, body)
            except (aiohttp.ClientError, asyncio.TimeoutError, json.JSONDecodeError) as e:
                last_error = e
                logger.warning(
                    f"Narrative request to {endpoint} failed "
                    f"(attempt {attempt + 1}/{self.retries + 1}): {e}"
                )
        logger.error(f"Narrative endpoint {url} unreachable: {last_error}")
        raise ProviderError(f"narrative request failed: {last_error}")

    @staticmethod
    async def _post(
        session: aiohttp.ClientSession, url: str, body: Dict[str, Any]
    ) -> Dict[str, Any]:
        async with session.post(url, json=body) as response:
            if response.status != 200:
                text = await response.text()
                raise ProviderError(f"{url} returned {response.status}: {text[:200]}")
            payload = await response.json()
        if not isinstance(payload, dict):
            raise ProviderError(f"{url} returned a non-object JSON body")
        return payload

    async def select_styles_async(
        self, theme: str, styles: Sequence[str], m: int
    ) -> List[str]:
        """Ask the service for up to m styles."""
        payload = await self._make_request(
            "select_styles", {"theme": theme, "styles": list(styles), "m": m}
        )
        chosen = payload.get("styles")
        if not isinstance(chosen, list):
            raise ProviderError("select_styles response lacks a styles list")
        return [str(s).lower() for s in chosen][:m]

    async def compose_async(
        self, theme: str, candidates: Sequence[Candidate], synopsis: SceneSynopsis
    ) -> Composition:
        """Ask the service to pick and order candidate scripts."""
        body = {
            "theme": theme,
            "styles": sorted({c.style.value for c in candidates}),
            "summaries": [{"id": c.id, "summary": c.summary} for c in candidates],
            "scene_synopsis": [
                {"category": cat, "count": n, "room": room} for cat, n, room in synopsis
            ],
        }
        payload = await self._make_request("compose", body)
        selected = payload.get("selected_ids")
        if not isinstance(selected, list):
            raise ProviderError("compose response lacks selected_ids")
        order = payload.get("order")
        if isinstance(order, list) and len(order) == len(selected):
            try:
                selected = [selected[int(i)] for i in order]
            except (IndexError, ValueError, TypeError):
                logger.warning("Ignoring malformed order in compose response")
        prose = payload.get("prose")
        return Composition(
            selected_ids=[str(i) for i in selected],
            prose=prose if isinstance(prose, str) else None,
        )

    async def generate_async(
        self,
        theme: str,
        skills: Sequence[Keyframe],
        synopsis: SceneSynopsis,
        n_keyframes: int,
    ) -> Generation:
        """Ask the service to write a whole keyframe sequence from the skill list."""
        body = {
            "theme": theme,
            "skills": [kf.to_record() for kf in skills],
            "scene_synopsis": [
                {"category": cat, "count": n, "room": room} for cat, n, room in synopsis
            ],
            "n_keyframes": n_keyframes,
        }
        payload = await self._make_request("generate", body)
        records = payload.get("keyframes")
        if not isinstance(records, list):
            raise ProviderError("generate response lacks a keyframes list")
        prose = payload.get("prose")
        return Generation(
            keyframes=[Keyframe.model_validate(r) for r in records],
            prose=prose if isinstance(prose, str) else None,
        )

    def select_styles(self, theme: str, styles: Sequence[str], m: int) -> List[str]:
        """Synchronous wrapper for select_styles_async."""
        return asyncio.run(self.select_styles_async(theme, styles, m))

    def compose(
        self, theme: str, candidates: Sequence[Candidate], synopsis: SceneSynopsis
    ) -> Composition:
        """Synchronous wrapper for compose_async."""
        return asyncio.run(self.compose_async(theme, candidates, synopsis))

    def generate(
        self,
        theme: str,
        skills: Sequence[Keyframe],
        synopsis: SceneSynopsis,
        n_keyframes: int,
    ) -> Generation:
        """Synchronous wrapper for generate_async."""
        return asyncio.run(self.generate_async(theme, skills, synopsis, n_keyframes))
