"""Black-box conformance checks for the provider wire protocol.

Any server claiming to implement the protocol (the bundled mock server, a
model sidecar) must pass ``run_conformance(base_url)`` unchanged. Checks are
plain HTTP; failures raise AssertionError with the failing check named.
"""

from __future__ import annotations

import numpy as np
import requests

from .providers import EMBEDDING_DIM

_TIMEOUT = 30.0


def _post(base_url, path, payload):
    return requests.post(f"{base_url}{path}", json=payload, timeout=_TIMEOUT)


def check_embed_shape(base_url: str) -> None:
    resp = _post(base_url, "/embed", {"texts": ["hello world"]})
    assert resp.status_code == 200, f"embed returned {resp.status_code}"
    body = resp.json()
    assert isinstance(body.get("model"), str) and body["model"], "missing model name"
    vectors = np.asarray(body["embeddings"], dtype=np.float64)
    assert vectors.shape == (1, EMBEDDING_DIM), f"bad shape {vectors.shape}"
    assert abs(np.linalg.norm(vectors[0]) - 1.0) < 1e-6, "vector not unit-norm"


def check_embed_cardinality_and_order(base_url: str) -> None:
    texts = ["alpha particle", "beta decay", "gamma ray", "alpha particle"]
    resp = _post(base_url, "/embed", {"texts": texts})
    assert resp.status_code == 200
    vectors = np.asarray(resp.json()["embeddings"], dtype=np.float64)
    assert vectors.shape == (len(texts), EMBEDDING_DIM), "one vector per text required"
    norms = np.linalg.norm(vectors, axis=1)
    assert np.all(np.abs(norms - 1.0) < 1e-6), "vectors not unit-norm"
    assert np.array_equal(vectors[0], vectors[3]), \
        "identical texts must embed identically within a session"


def check_embed_deterministic(base_url: str) -> None:
    first = _post(base_url, "/embed", {"texts": ["determinism probe"]}).json()
    second = _post(base_url, "/embed", {"texts": ["determinism probe"]}).json()
    assert first["embeddings"] == second["embeddings"], \
        "same text embedded twice must match within a session"


def check_metadata_contract(base_url: str) -> None:
    keywords = ["thermal protection system", "lidar", "xenon propellant"]
    resp = _post(base_url, "/metadata", {
        "abstract": "The probe tests a thermal protection system with lidar guidance "
                    "and xenon propellant reserves.",
        "keywords": keywords,
    })
    assert resp.status_code == 200, f"metadata returned {resp.status_code}"
    body = resp.json()
    assert isinstance(body.get("model"), str) and body["model"], "missing model name"
    records = body["metadata"]
    assert [r["keyword"] for r in records] == keywords, "keywords missing or reordered"
    assert all(isinstance(r["text"], str) and r["text"] for r in records), \
        "every keyword needs non-empty metadata text"


def check_error_codes(base_url: str) -> None:
    bad = requests.post(f"{base_url}/embed", data=b"{not json",
                        headers={"Content-Type": "application/json"}, timeout=_TIMEOUT)
    assert bad.status_code == 400, f"malformed body: expected 400, got {bad.status_code}"
    assert "error" in bad.json()

    missing = _post(base_url, "/embed", {})
    assert missing.status_code == 400, "missing texts field must 400"

    empty_text = _post(base_url, "/embed", {"texts": ["ok", ""]})
    assert empty_text.status_code == 400, "empty text must 400"

    no_keywords = _post(base_url, "/metadata", {"abstract": "a", "keywords": []})
    assert no_keywords.status_code == 400, "empty keywords must 400"

    no_abstract = _post(base_url, "/metadata", {"keywords": ["k"]})
    assert no_abstract.status_code == 400, "missing abstract must 400"


ALL_CHECKS = [
    check_embed_shape,
    check_embed_cardinality_and_order,
    check_embed_deterministic,
    check_metadata_contract,
    check_error_codes,
]


def run_conformance(base_url: str) -> list[str]:
    """Run every check against a live server; returns the passed check names."""
    base_url = base_url.rstrip("/")
    passed = []
    for check in ALL_CHECKS:
        check(base_url)
        passed.append(check.__name__)
    return passed
