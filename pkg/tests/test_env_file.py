"""Tests for environment-driven configuration."""

import os

import pytest
from dotenv import load_dotenv

from agents.base_agent import resolve_log_level
from data_store.errors import ProviderError
from embedding.providers import (
    HashEmbedder,
    ProjectedProvider,
    build_embedding_provider,
)
from protocols.embedding_client import HttpEmbeddingProvider
from protocols.llm_narrator import LiteLlmNarrativeProvider
from protocols.narrative_client import HttpNarrativeProvider


@pytest.fixture
def clean_env(monkeypatch):
    for name in (
        "DEBUG",
        "LOG_LEVEL",
        "EMBEDDING_ENDPOINT_URL",
        "EMBEDDING_TIMEOUT_S",
        "EMBEDDING_RETRIES",
        "NARRATIVE_ENDPOINT_URL",
        "NARRATIVE_TIMEOUT_S",
        "NARRATIVE_RETRIES",
        "LLM_MODEL",
        "LLM_API_BASE",
    ):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestEnvFile:
    """Values loaded from a .env file."""

    def test_env_file_loaded(self, clean_env, temp_dir):
        """Variables from the file reach the embedding client."""
        path = os.path.join(temp_dir, ".env")
        with open(path, "w", encoding="utf-8") as f:
            f.write("EMBEDDING_ENDPOINT_URL=http://localhost:9000\n")
            f.write("EMBEDDING_TIMEOUT_S=3.5\n")
            f.write("EMBEDDING_RETRIES=5\n")
        for name in ("EMBEDDING_ENDPOINT_URL", "EMBEDDING_TIMEOUT_S", "EMBEDDING_RETRIES"):
            clean_env.setenv(name, "")
        load_dotenv(dotenv_path=path, override=True)
        client = HttpEmbeddingProvider(native_dim=32)
        assert client.base_url == "http://localhost:9000"
        assert client.timeout_s == 3.5
        assert client.retries == 5
        assert client.dim() == 32

    def test_narrative_settings_are_separate(self, clean_env):
        """The narrative client reads its own timeout and retry count."""
        clean_env.setenv("EMBEDDING_TIMEOUT_S", "3.5")
        clean_env.setenv("EMBEDDING_RETRIES", "5")
        clean_env.setenv("NARRATIVE_TIMEOUT_S", "30")
        clean_env.setenv("NARRATIVE_RETRIES", "0")
        client = HttpNarrativeProvider(base_url="http://localhost:9100")
        assert client.timeout_s == 30.0
        assert client.retries == 0

    def test_narrative_defaults(self, clean_env):
        clean_env.setenv("EMBEDDING_TIMEOUT_S", "3.5")
        client = HttpNarrativeProvider(base_url="http://localhost:9100")
        assert client.timeout_s == 10.0
        assert client.retries == 2


class TestLogLevel:
    """LOG_LEVEL and DEBUG."""

    def test_default(self, clean_env):
        assert resolve_log_level() == "INFO"

    def test_env_and_argument(self, clean_env):
        """An explicit level wins over LOG_LEVEL."""
        clean_env.setenv("LOG_LEVEL", "warning")
        assert resolve_log_level() == "WARNING"
        assert resolve_log_level("error") == "ERROR"

    def test_debug_forces_debug(self, clean_env):
        clean_env.setenv("DEBUG", "true")
        assert resolve_log_level("error") == "DEBUG"


class TestProviderDefaults:
    """Providers fall back or refuse when nothing is configured."""

    def test_hash_embedder_without_endpoint(self, clean_env):
        provider = build_embedding_provider(dim=16, seed=2)
        assert isinstance(provider, HashEmbedder)
        assert provider.dim() == 16

    def test_http_provider_with_endpoint(self, clean_env):
        provider = build_embedding_provider(endpoint="http://localhost:9000")
        assert isinstance(provider, ProjectedProvider)
        assert isinstance(provider.inner, HttpEmbeddingProvider)

    def test_http_client_needs_endpoint(self, clean_env):
        with pytest.raises(ProviderError):
            HttpEmbeddingProvider()

    def test_llm_needs_model(self, clean_env):
        with pytest.raises(ProviderError):
            LiteLlmNarrativeProvider()

    def test_llm_from_env(self, clean_env):
        """LLM_MODEL set; api base defaults to the local Ollama port."""
        clean_env.setenv("LLM_MODEL", "ollama/mistral:latest")
        narrator = LiteLlmNarrativeProvider()
        assert narrator.model == "ollama/mistral:latest"
        assert narrator.api_base == "http://localhost:11434"
