import numpy as np
import pytest
from fastapi.testclient import TestClient

from sidecar.embedders import DIMENSION, EmbedderError, HashEmbedder, make_embedder
from sidecar.server import SidecarConfig, create_app


@pytest.fixture()
def client():
    app = create_app(SidecarConfig(embed_model="hash", llm="template"))
    return TestClient(app)


class TestEmbedders:
    def test_hash_embedder_contract(self):
        embedder = make_embedder("hash")
        vectors = embedder.embed(["alpha beta", "gamma"])
        assert vectors.shape == (2, DIMENSION)
        assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-9)
        again = embedder.embed(["alpha beta", "gamma"])
        assert np.array_equal(vectors, again)

    def test_shared_tokens_raise_cosine(self):
        embedder = HashEmbedder()
        near = embedder.embed(["solar array wing", "solar array blanket"])
        far = embedder.embed(["solar array wing", "cryogenic pump seal"])
        assert float(near[0] @ near[1]) > float(far[0] @ far[1])

    def test_wrong_dimension_refused(self, monkeypatch):
        monkeypatch.setattr(HashEmbedder, "dimension", 384)
        with pytest.raises(EmbedderError, match="768"):
            make_embedder("hash")


class TestEndpoints:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["embed_model"] == "hash-embedder-v1"

    def test_embed_contract(self, client):
        resp = client.post("/embed", json={"texts": ["hello"]})
        assert resp.status_code == 200
        body = resp.json()
        vec = np.asarray(body["embeddings"])
        assert vec.shape == (1, DIMENSION)
        assert abs(np.linalg.norm(vec[0]) - 1.0) < 1e-6
        assert body["model"] == "hash-embedder-v1"

    def test_metadata_contract(self, client):
        keywords = ["thermal protection system", "arc jet"]
        resp = client.post("/metadata", json={
            "abstract": "Arc jet testing qualifies the thermal protection system "
                        "for entry heating environments.",
            "keywords": keywords,
        })
        assert resp.status_code == 200
        records = resp.json()["metadata"]
        assert [r["keyword"] for r in records] == keywords
        assert all(r["text"] for r in records)
        # The template backend writes contextual definitions that mention
        # the keyword itself.
        assert all(r["keyword"].lower() in r["text"].lower() for r in records)

    def test_malformed_body_is_400(self, client):
        resp = client.post("/embed", content=b"{broken",
                           headers={"Content-Type": "application/json"})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_missing_field_is_400(self, client):
        assert client.post("/embed", json={}).status_code == 400
        assert client.post("/metadata", json={"keywords": ["k"]}).status_code == 400

    def test_empty_keyword_list_is_400(self, client):
        resp = client.post("/metadata", json={"abstract": "a", "keywords": []})
        assert resp.status_code == 400

    def test_unparseable_llm_output_is_422(self):
        class Broken:
            name = "broken"

            def complete(self, prompt):
                return "nothing structured"

        app = create_app(SidecarConfig(embed_model="hash"), llm=Broken())
        client = TestClient(app)
        resp = client.post("/metadata", json={"abstract": "a b c", "keywords": ["kw"]})
        assert resp.status_code == 422
        assert "kw" in resp.json()["error"]

    def test_model_failure_is_502(self):
        class Exploding:
            name = "exploding"
            dimension = DIMENSION

            def embed(self, texts):
                raise RuntimeError("backend on fire")

        app = create_app(SidecarConfig(llm="template"), embedder=Exploding())
        client = TestClient(app)
        resp = client.post("/embed", json={"texts": ["x"]})
        assert resp.status_code == 502
