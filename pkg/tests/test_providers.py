import hashlib

import numpy as np
import pytest

from labelkit.providers import (
    EMBEDDING_DIM,
    DimensionMismatchError,
    EmbeddingCache,
    EmbeddingClient,
    MetadataClient,
    MetadataRecord,
    MockEmbedder,
    MockMetadataGenerator,
    ProviderConfig,
    ProviderError,
    concat_for_embedding,
    make_providers,
    mock_embedding,
)


def reference_mock_embedding(text):
    """Independent re-run of the documented hashing scheme."""
    import re

    tokens = re.findall(r"[a-z0-9]+(?:[-'][a-z0-9]+)*", text.lower())
    vec = np.zeros(EMBEDDING_DIM)
    for tok in tokens:
        h = int.from_bytes(hashlib.sha1(tok.encode()).digest()[:8], "big")
        vec[h % EMBEDDING_DIM] += 1.0
    for a, b in zip(tokens, tokens[1:]):
        h = int.from_bytes(hashlib.sha1(f"{a} {b}".encode()).digest()[:8], "big")
        vec[h % EMBEDDING_DIM] += 0.25
    return vec / np.linalg.norm(vec)


class TestMockEmbedder:
    def test_unit_norm_768(self):
        vec = mock_embedding("any text at all")
        assert vec.shape == (EMBEDDING_DIM,)
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-9

    def test_pure_function(self):
        a = mock_embedding("plasma thruster grid")
        b = mock_embedding("plasma thruster grid")
        assert np.array_equal(a, b)

    def test_token_overlap_orders_cosines(self):
        # Oracle: cosines computed with an independent implementation of the
        # documented scheme must match, and shared-token texts must beat
        # disjoint ones.
        close_a = "ion thruster grid cathode xenon"
        close_b = "ion thruster grid cathode plasma"
        far = "membrane brine recovery distillation loop"
        got_close = float(mock_embedding(close_a) @ mock_embedding(close_b))
        got_far = float(mock_embedding(close_a) @ mock_embedding(far))
        exp_close = float(reference_mock_embedding(close_a) @ reference_mock_embedding(close_b))
        exp_far = float(reference_mock_embedding(close_a) @ reference_mock_embedding(far))
        assert got_close == pytest.approx(exp_close, abs=1e-12)
        assert got_far == pytest.approx(exp_far, abs=1e-12)
        assert got_close > got_far


class TestEmbeddingClient:
    def test_cache_hit_bit_identical(self):
        client = EmbeddingClient(MockEmbedder())
        first = client.embed(["a"])
        second = client.embed(["a"])
        assert np.array_equal(first, second)

    def test_cardinality_and_order(self):
        client = EmbeddingClient(MockEmbedder())
        texts = ["one two", "three four five", "six"]
        out = client.embed(texts)
        assert out.shape == (3, EMBEDDING_DIM)
        singles = [client.embed_one(t) for t in texts]
        assert all(np.array_equal(out[i], singles[i]) for i in range(3))

    def test_rejects_empty_text(self):
        client = EmbeddingClient(MockEmbedder())
        with pytest.raises(ValueError):
            client.embed(["fine", ""])

    def test_cache_round_trip_persists(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        first = EmbeddingClient(MockEmbedder(), EmbeddingCache(path))
        vec = first.embed_one("persistent text")
        reloaded = EmbeddingClient(MockEmbedder(), EmbeddingCache(path))
        assert np.array_equal(reloaded.embed_one("persistent text"), vec)
        assert len(reloaded.cache) == 1

    def test_dimension_mismatch_reported(self):
        class BadBackend:
            identity = "bad"

            def embed_batch(self, texts):
                return np.ones((len(texts), 4))

        client = EmbeddingClient(BadBackend())
        with pytest.raises(DimensionMismatchError, match="768"):
            client.embed(["x"])


class TestMetadata:
    def test_deterministic_and_contextual(self):
        gen = MetadataClient(MockMetadataGenerator())
        abstract = "The lidar instrument measures aerosol backscatter from orbit daily."
        first = gen.generate_metadata(abstract, ["lidar"])
        second = gen.generate_metadata(abstract, ["lidar"])
        assert first == second
        assert first[0].keyword == "lidar"
        assert "aerosol" in first[0].metadata_text or "backscatter" in first[0].metadata_text

    def test_one_record_per_keyword_in_order(self):
        gen = MetadataClient(MockMetadataGenerator())
        keywords = ["alpha beta", "gamma", "delta", "epsilon zeta", "eta"]
        records = gen.generate_metadata("alpha beta gamma delta epsilon zeta eta", keywords)
        assert [r.keyword for r in records] == keywords
        assert all(r.metadata_text for r in records)

    def test_rejects_empty_inputs(self):
        gen = MetadataClient(MockMetadataGenerator())
        with pytest.raises(ValueError):
            gen.generate_metadata("", ["k"])
        with pytest.raises(ValueError):
            gen.generate_metadata("abstract", [])

    def test_missing_keyword_detected(self):
        class Dropper:
            identity = "dropper"

            def generate(self, abstract, keywords):
                return [MetadataRecord(k, "text") for k in keywords[:-1]]

        with pytest.raises(ProviderError):
            MetadataClient(Dropper()).generate_metadata("abs", ["a", "b"])


class TestConcat:
    def test_keyword_separator_metadata(self):
        rec = MetadataRecord("lidar", "a ranging technique using pulsed lasers")
        assert concat_for_embedding(rec) == "lidar: a ranging technique using pulsed lasers"

    def test_ablation_mode_keyword_alone(self):
        rec = MetadataRecord("lidar", "a ranging technique")
        assert concat_for_embedding(rec, include_metadata=False) == "lidar"

    def test_empty_metadata_rejected_upstream(self):
        with pytest.raises(ValueError):
            MetadataRecord("lidar", "")


def test_make_providers_env_override(monkeypatch):
    monkeypatch.setenv("AI_EMBED_URL", "http://example.invalid:1")
    providers = make_providers(ProviderConfig())
    assert providers.embedder.identity == "http:http://example.invalid:1"
    monkeypatch.delenv("AI_EMBED_URL")


def test_provider_config_validation():
    with pytest.raises(ValueError):
        ProviderConfig(timeout=0)
    with pytest.raises(ValueError):
        ProviderConfig(retry_count=-1)
