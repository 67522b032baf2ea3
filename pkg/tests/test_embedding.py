"""Tests for embedding math, offline providers and the HTTP client."""

import numpy as np
import pytest
from aiohttp import web
from aiohttp.test_utils import TestServer as LocalServer

from data_store.errors import (
    DegenerateEmbeddingError,
    EmbeddingDimensionError,
    ProviderError,
)
from embedding.providers import (
    HashEmbedder,
    ProjectedProvider,
    build_embedding_provider,
    orthogonal_projection,
    test_embed,
)
from embedding.vectors import (
    alignment_loss,
    cosine_similarity,
    is_unit,
    normalize,
    similarity_matrix,
)
from protocols.embedding_client import HttpEmbeddingProvider


class TestVectors:
    """Unit-sphere math."""

    def test_normalize(self):
        """3-4-5 triangle."""
        assert np.allclose(normalize([3.0, 4.0]), [0.6, 0.8])

    def test_normalize_zero_vector(self):
        """Zero vectors cannot be normalized."""
        with pytest.raises(DegenerateEmbeddingError):
            normalize([0.0, 0.0, 0.0])

    def test_cosine_extremes(self):
        """Aligned, orthogonal and antipodal unit vectors."""
        a = np.array([1.0, 0.0])
        assert cosine_similarity(a, a) == 1.0
        assert cosine_similarity(a, [0.0, 1.0]) == 0.0
        assert cosine_similarity(a, -a) == -1.0

    def test_dimension_mismatch(self):
        """Vectors of different length are rejected."""
        with pytest.raises(EmbeddingDimensionError):
            cosine_similarity([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_alignment_loss(self):
        """One minus cosine similarity."""
        z = normalize([1.0, 1.0])
        assert alignment_loss(z, z) == pytest.approx(0.0)
        assert alignment_loss(z, -z) == pytest.approx(2.0)

    def test_similarity_matrix_matches_pairwise(self):
        """Stacked similarity equals the per-key cosine."""
        keys = np.stack([test_embed(t) for t in ("a", "b", "c")])
        query = test_embed("query")
        sims = similarity_matrix(query, keys)
        for key, sim in zip(keys, sims):
            assert sim == pytest.approx(cosine_similarity(query, key))


class TestHashEmbedder:
    """Deterministic offline provider."""

    def test_deterministic_and_unit(self):
        """Same text and seed give the same unit vector."""
        a, b = HashEmbedder(seed=3), HashEmbedder(seed=3)
        assert np.array_equal(a.embed("sit down"), b.embed("sit down"))
        assert is_unit(a.embed("sit down"))
        assert a.dim() == 64

    def test_seed_and_text_change_the_vector(self):
        """Different seeds or texts give different vectors."""
        assert not np.array_equal(test_embed("x", seed=0), test_embed("x", seed=1))
        assert not np.array_equal(test_embed("x"), test_embed("y"))

    def test_cache_returns_copies(self):
        """Mutating a returned vector does not poison the cache."""
        provider = HashEmbedder()
        first = provider.embed("walk")
        first[:] = 0.0
        assert is_unit(provider.embed("walk"))

    def test_rejects_tiny_dim(self):
        """At least two dimensions."""
        with pytest.raises(EmbeddingDimensionError):
            HashEmbedder(dim=1)


class TestProjection:
    """Seeded orthogonal projection for foreign dimensions."""

    def test_rows_are_orthonormal(self):
        """P P^T = I."""
        p = orthogonal_projection(512, 64, seed=0)
        assert p.shape == (64, 512)
        assert np.allclose(p @ p.T, np.eye(64), atol=1e-10)

    def test_projected_provider(self):
        """A 128-dim provider is mapped down to unit 64-dim vectors."""
        projected = ProjectedProvider(HashEmbedder(dim=128), dim=64, seed=1)
        vector = projected.embed("lie on the bed")
        assert vector.shape == (64,)
        assert is_unit(vector)
        native = test_embed("lie on the bed", 128)
        expected = normalize(orthogonal_projection(128, 64, 1) @ native)
        assert np.allclose(vector, expected)

    def test_projected_batch_matches_single(self):
        """Batch and single embeds share one projection."""
        projected = ProjectedProvider(HashEmbedder(dim=96), dim=32, seed=3)
        batch = projected.embed_batch(["walk", "sit"])
        assert np.allclose(batch[0], projected.embed("walk"))
        assert np.allclose(batch[1], projected.embed("sit"))

    def test_native_dim_change_rejected(self):
        """The first vector fixes the native dim."""
        projected = ProjectedProvider(HashEmbedder(dim=96), dim=32, seed=3)
        projected.project(test_embed("a", 96))
        with pytest.raises(EmbeddingDimensionError):
            projected.project(test_embed("b", 80))

    def test_no_upward_projection(self):
        """Projection cannot add dimensions."""
        with pytest.raises(EmbeddingDimensionError):
            orthogonal_projection(16, 64, seed=0)

    def test_factory_defaults_to_hash(self):
        """No endpoint means the offline provider."""
        assert isinstance(build_embedding_provider(32, 5, ""), HashEmbedder)

    def test_factory_wraps_http_client(self):
        """An endpoint gives the HTTP client behind the shared projection."""
        provider = build_embedding_provider(32, 5, "http://localhost:9000/embed")
        assert isinstance(provider, ProjectedProvider)
        assert isinstance(provider.inner, HttpEmbeddingProvider)
        assert provider.dim() == 32
        assert provider.seed == 5


def _embedding_app(native_dim: int, status: int = 200) -> web.Application:
    calls = []

    async def embed(request: web.Request) -> web.Response:
        body = await request.json()
        calls.append(body["texts"])
        if status != 200:
            return web.Response(status=status, text="boom")
        vectors = [test_embed(t, dim=native_dim).tolist() for t in body["texts"]]
        return web.json_response({"vectors": vectors})

    app = web.Application()
    app["calls"] = calls
    app.router.add_post("/embed", embed)
    return app


class TestHttpEmbeddingProvider:
    """aiohttp client against a local test server."""

    @pytest.mark.asyncio
    async def test_batch_is_native_and_cached(self):
        """Vectors keep the service's dim; repeats are not re-requested."""
        app = _embedding_app(native_dim=96)
        async with LocalServer(app) as server:
            url = str(server.make_url("/embed"))
            async with HttpEmbeddingProvider(base_url=url, retries=0) as client:
                first = await client.embed_batch_async(["walk", "sit", "walk"])
                second = await client.embed_batch_async(["sit"])
                assert client.dim() == 96
        assert [v.shape for v in first] == [(96,)] * 3
        assert np.allclose(first[0], test_embed("walk", dim=96))
        assert np.array_equal(first[0], first[2])
        assert np.array_equal(first[1], second[0])
        assert app["calls"] == [["walk", "sit"]]

    @pytest.mark.asyncio
    async def test_wrapper_projects_service_vectors(self):
        """ProjectedProvider maps the service's 96 dims to 64."""
        app = _embedding_app(native_dim=96)
        async with LocalServer(app) as server:
            url = str(server.make_url("/embed"))
            async with HttpEmbeddingProvider(base_url=url, retries=0) as client:
                (native,) = await client.embed_batch_async(["reach the shelf"])
                projected = ProjectedProvider(client, dim=64, seed=0).project(native)
        assert projected.shape == (64,)
        assert is_unit(projected)
        expected = normalize(orthogonal_projection(96, 64, 0) @ native)
        assert np.allclose(projected, expected)

    @pytest.mark.asyncio
    async def test_unexpected_dim_raises(self):
        """A configured native dim is enforced."""
        app = _embedding_app(native_dim=64)
        async with LocalServer(app) as server:
            url = str(server.make_url("/embed"))
            async with HttpEmbeddingProvider(
                base_url=url, native_dim=32, retries=0
            ) as client:
                with pytest.raises(ProviderError):
                    await client.embed_batch_async(["x"])

    @pytest.mark.asyncio
    async def test_error_status_raises_provider_error(self):
        """Non-200 answers surface as ProviderError."""
        app = _embedding_app(native_dim=64, status=500)
        async with LocalServer(app) as server:
            url = str(server.make_url("/embed"))
            async with HttpEmbeddingProvider(base_url=url, retries=1) as client:
                with pytest.raises(ProviderError):
                    await client.embed_batch_async(["x"])

    def test_dim_unknown_before_first_response(self):
        with pytest.raises(ProviderError):
            HttpEmbeddingProvider(base_url="http://localhost:9000/embed").dim()

    def test_requires_endpoint(self, monkeypatch):
        """Without a URL the client refuses to start."""
        monkeypatch.delenv("EMBEDDING_ENDPOINT_URL", raising=False)
        with pytest.raises(ProviderError):
            HttpEmbeddingProvider(base_url="")
