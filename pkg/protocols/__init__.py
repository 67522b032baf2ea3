"""HTTP and LLM clients for embedding and narrative providers.

The LiteLLM-backed narrator lives in protocols.llm_narrator and is imported on demand.
"""

from .embedding_client import HttpEmbeddingProvider
from .narrative_client import HttpNarrativeProvider

__all__ = ["HttpEmbeddingProvider", "HttpNarrativeProvider"]
