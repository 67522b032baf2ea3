"""Text embedding providers."""

import hashlib
import logging
import threading
from typing import Dict, List, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from data_store.errors import EmbeddingDimensionError
from embedding.vectors import DEFAULT_DIM, EmbeddingVector, as_vector, normalize

logger = logging.getLogger(__name__)


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Anything that turns text into a fixed-dimension unit vector."""

    def embed(self, text: str) -> EmbeddingVector:
        """Embed one text."""
        ...

    def dim(self) -> int:
        """Output dimension."""
        ...


def _text_seed(text: str, seed: int) -> int:
    digest = hashlib.blake2b(
        text.encode("utf-8") + b"\x00" + int(seed).to_bytes(8, "little", signed=True),
        digest_size=16,
    ).digest()
    return int.from_bytes(digest, "little")


def test_embed(text: str, dim: int = DEFAULT_DIM, seed: int = 0) -> EmbeddingVector:
    """Deterministic pseudo-random unit vector keyed on (text, seed)."""
    if dim < 2:
        raise EmbeddingDimensionError(f"embedding dim must be >= 2, got {dim}")
    rng = np.random.default_rng(_text_seed(text, seed))
    return normalize(rng.standard_normal(dim))


# Not a pytest test function.
test_embed.__test__ = False  # type: ignore[attr-defined]


class HashEmbedder:
    """Offline provider backed by test_embed, with a thread-safe cache."""

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        """Initialize the hash embedder."""
        if dim < 2:
            raise EmbeddingDimensionError(f"embedding dim must be >= 2, got {dim}")
        self._dim = dim
        self.seed = seed
        self._cache: Dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> EmbeddingVector:
        """Embed one text."""
        with self._lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        vector = test_embed(text, self._dim, self.seed)
        with self._lock:
            self._cache[text] = vector
        return vector.copy()

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        """Embed several texts."""
        return [self.embed(text) for text in texts]

    def dim(self) -> int:
        """Output dimension."""
        return self._dim


def orthogonal_projection(source_dim: int, target_dim: int, seed: int) -> np.ndarray:
    """Fixed seeded projection with orthonormal rows, shape (target, source)."""
    if target_dim > source_dim:
        raise EmbeddingDimensionError(
            f"cannot project {source_dim}-dim vectors up to {target_dim}"
        )
    rng = np.random.default_rng(seed)
    gaussian = rng.standard_normal((source_dim, target_dim))
    q, r = np.linalg.qr(gaussian)
    # Sign fix makes the factorisation unique.
    q = q * np.sign(np.diag(r))
    return np.ascontiguousarray(q.T)


class ProjectedProvider:
    """Maps an inner provider's native vectors to the target dim.

    The native dimension is taken from the first vector the inner provider
    returns; a later vector of another size is an error.
    """

    def __init__(self, inner: EmbeddingProvider, dim: int = DEFAULT_DIM, seed: int = 0):
        """Initialize the projection around an inner provider."""
        if dim < 2:
            raise EmbeddingDimensionError(f"embedding dim must be >= 2, got {dim}")
        self.inner = inner
        self._dim = dim
        self.seed = seed
        self._native: Optional[int] = None
        self._projection: Optional[np.ndarray] = None
        self._lock = threading.Lock()

    def _projection_for(self, native: int) -> Optional[np.ndarray]:
        with self._lock:
            if self._native is None:
                if native != self._dim:
                    self._projection = orthogonal_projection(
                        native, self._dim, self.seed
                    )
                self._native = native
            elif native != self._native:
                raise EmbeddingDimensionError(
                    f"provider returned {native} dims, expected {self._native}"
                )
            return self._projection

    def project(self, values: Sequence[float]) -> EmbeddingVector:
        """Project and normalize a native vector."""
        vector = as_vector(values)
        projection = self._projection_for(int(vector.shape[0]))
        if projection is None:
            return normalize(vector)
        return normalize(projection @ vector)

    def embed(self, text: str) -> EmbeddingVector:
        """Embed one text."""
        return self.project(self.inner.embed(text))

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        """Embed several texts, batching through the inner provider when it can."""
        batch = getattr(self.inner, "embed_batch", None)
        if batch is None:
            return [self.embed(text) for text in texts]
        return [self.project(values) for values in batch(texts)]

    def dim(self) -> int:
        """Output dimension."""
        return self._dim


def build_embedding_provider(
    dim: int = DEFAULT_DIM, seed: int = 0, endpoint: str = ""
) -> EmbeddingProvider:
    """Pick the HTTP provider when an endpoint is configured, else the hash embedder."""
    if endpoint:
        from protocols.embedding_client import HttpEmbeddingProvider

        logger.info(f"Using HTTP embedding provider at {endpoint} (dim={dim})")
        client = HttpEmbeddingProvider(base_url=endpoint)
        return ProjectedProvider(client, dim=dim, seed=seed)
    logger.info(f"Using hash embedder (dim={dim}, seed={seed})")
    return HashEmbedder(dim=dim, seed=seed)
