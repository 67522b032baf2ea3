"""Embedding math and text embedding providers."""

from .providers import (
    EmbeddingProvider,
    HashEmbedder,
    ProjectedProvider,
    build_embedding_provider,
    test_embed,
)
from .vectors import (
    DEFAULT_DIM,
    EmbeddingVector,
    alignment_loss,
    cosine_similarity,
    normalize,
)

__all__ = [
    "DEFAULT_DIM",
    "EmbeddingProvider",
    "EmbeddingVector",
    "HashEmbedder",
    "ProjectedProvider",
    "alignment_loss",
    "build_embedding_provider",
    "cosine_similarity",
    "normalize",
    "test_embed",
]
