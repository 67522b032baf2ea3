"""HTTP client for external text embedding services."""

import asyncio
import json
import logging
import os
import threading
from typing import Any, Dict, List, Optional, Sequence

import aiohttp
from dotenv import load_dotenv

from data_store.errors import ProviderError
from embedding.vectors import EmbeddingVector, as_vector, normalize

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class HttpEmbeddingProvider:
    """Embedding provider speaking POST {"texts"} -> {"vectors"}.

    Returns normalized vectors in the service's native dimension. Wrap it in
    ``embedding.providers.ProjectedProvider`` to reach a fixed target dim.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        native_dim: Optional[int] = None,
        timeout_s: Optional[float] = None,
        retries: Optional[int] = None,
    ):
        """Initialize the embedding client."""
        self.base_url = base_url or os.getenv("EMBEDDING_ENDPOINT_URL", "")
        if not self.base_url:
            raise ProviderError("no embedding endpoint configured")
        self._native_dim = native_dim
        self.timeout_s = float(
            timeout_s if timeout_s is not None else os.getenv("EMBEDDING_TIMEOUT_S", "10")
        )
        self.retries = int(
            retries if retries is not None else os.getenv("EMBEDDING_RETRIES", "2")
        )
        self.session: Optional[aiohttp.ClientSession] = None
        self._cache: Dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()

    async def __aenter__(self) -> "HttpEmbeddingProvider":
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

    def dim(self) -> int:
        """Native dimension, known once configured or after the first response."""
        if self._native_dim is None:
            raise ProviderError("embedding dimension unknown before the first response")
        return self._native_dim

    def _check(self, values: Sequence[float]) -> EmbeddingVector:
        vector = normalize(as_vector(values))
        native = int(vector.shape[0])
        with self._lock:
            if self._native_dim is None:
                self._native_dim = native
            elif native != self._native_dim:
                raise ProviderError(
                    f"embedding endpoint returned {native} dims, "
                    f"expected {self._native_dim}"
                )
        return vector

    async def _post(self, session: aiohttp.ClientSession, texts: List[str]) -> List[Any]:
        """POST one batch, retrying transport failures."""
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                async with session.post(self.base_url, json={"texts": texts}) as response:
                    if response.status != 200:
                        body = await response.text()
                        raise ProviderError(
                            f"embedding endpoint returned {response.status}: {body[:200]}"
                        )
                    payload = await response.json()
                vectors = payload.get("vectors") if isinstance(payload, dict) else None
                if not isinstance(vectors, list) or len(vectors) != len(texts):
                    raise ProviderError("embedding response lacks one vector per text")
                return vectors
            except (aiohttp.ClientError, asyncio.TimeoutError, json.JSONDecodeError) as e:
                last_error = e
                logger.warning(
                    f"Embedding request failed (attempt {attempt + 1}/{self.retries + 1}): {e}"
                )
        logger.error(f"Embedding endpoint {self.base_url} unreachable: {last_error}")
        raise ProviderError(f"embedding request failed: {last_error}")

    async def embed_batch_async(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        """Embed several texts, serving repeats from the cache."""
        with self._lock:
            missing = [t for t in dict.fromkeys(texts) if t not in self._cache]
        if missing:
            if self.session is not None:
                raw = await self._post(self.session, missing)
            else:
                async with aiohttp.ClientSession(
                    timeout=aiohttp.ClientTimeout(total=self.timeout_s)
                ) as session:
                    raw = await self._post(session, missing)
            vectors = [self._check(values) for values in raw]
            with self._lock:
                self._cache.update(zip(missing, vectors))
        with self._lock:
            return [self._cache[t].copy() for t in texts]

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        """Synchronous wrapper around embed_batch_async."""
        return asyncio.run(self.embed_batch_async(texts))

    def embed(self, text: str) -> EmbeddingVector:
        """Embed one text."""
        with self._lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        return self.embed_batch([text])[0]
