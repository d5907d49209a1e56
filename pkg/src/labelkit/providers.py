"""Embedding and metadata providers: deterministic mocks, HTTP clients, cache.

Both provider kinds exist in two flavors. The mock flavor is a pure function
of its input text so every pipeline stage is reproducible offline; the HTTP
flavor speaks the wire protocol below and is used against a mock server or a
live model sidecar:

    POST {base}/embed     {"texts": [...]}            -> {"embeddings": [[float x 768], ...], "model": str}
    POST {base}/metadata  {"abstract": ..., "keywords": [...]}
                                                      -> {"metadata": [{"keyword": ..., "text": ...}, ...], "model": str}

The environment variables AI_EMBED_URL and AI_METADATA_URL override the
configured endpoints.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

EMBEDDING_DIM = 768

# Weight of the bigram component in the mock embedding scheme.
_BIGRAM_WEIGHT = 0.25

_WORD_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")


class ProviderError(Exception):
    """Raised when a provider call fails or returns an invalid response."""


class DimensionMismatchError(ProviderError):
    """Raised when a provider returns vectors of an unexpected dimension."""


@dataclass(frozen=True)
class MetadataRecord:
    """A keyword and its contextual definition."""

    keyword: str
    metadata_text: str

    def __post_init__(self):
        if not self.metadata_text:
            raise ValueError(f"empty metadata_text for keyword {self.keyword!r}")


@dataclass
class ProviderConfig:
    embed_endpoint: str = "mock"
    metadata_endpoint: str = "mock"
    timeout: float = 30.0
    retry_count: int = 2
    cache_path: str | None = None
    bearer_token: str | None = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.retry_count < 0:
            raise ValueError("retry_count must be >= 0")


def stable_hash(text: str) -> int:
    """Platform-independent 64-bit hash of a string."""
    return int.from_bytes(hashlib.sha1(text.encode("utf-8")).digest()[:8], "big")


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit Euclidean norm; rows of zeros are rejected."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ProviderError("cannot normalize a zero embedding vector")
    return matrix / norms


def mock_embedding(text: str) -> np.ndarray:
    """Deterministic embedding of one text: token hashing into 768 bins.

    Each lowercased token increments the bin ``stable_hash(token) % 768``;
    each adjacent token pair adds ``_BIGRAM_WEIGHT`` to the bin of the joined
    pair. The result is unit-normalized. Texts sharing many tokens therefore
    land close in cosine terms while disjoint texts are near-orthogonal.
    """
    tokens = _WORD_RE.findall(text.lower())
    vec = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for tok in tokens:
        vec[stable_hash(tok) % EMBEDDING_DIM] += 1.0
    for left, right in zip(tokens, tokens[1:]):
        vec[stable_hash(left + " " + right) % EMBEDDING_DIM] += _BIGRAM_WEIGHT
    if not tokens:
        # Degenerate but non-empty input (e.g. punctuation only).
        vec[stable_hash(text) % EMBEDDING_DIM] = 1.0
    return vec / np.linalg.norm(vec)


class MockEmbedder:
    """Offline embedding backend implementing the documented hashing scheme."""

    identity = "mock-embedder-v1"

    def embed_batch(self, texts) -> np.ndarray:
        return np.stack([mock_embedding(t) for t in texts])


class HttpEmbedder:
    """Embedding backend that POSTs to {base}/embed per the wire protocol."""

    def __init__(self, base_url: str, timeout: float = 30.0, retry_count: int = 2,
                 bearer_token: str | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retry_count = retry_count
        self.identity = f"http:{self.base_url}"
        self._headers = {"Content-Type": "application/json"}
        if bearer_token:
            self._headers["Authorization"] = f"Bearer {bearer_token}"

    def embed_batch(self, texts) -> np.ndarray:
        payload = {"texts": list(texts)}
        body = _post_json(f"{self.base_url}/embed", payload, self._headers,
                          self.timeout, self.retry_count)
        embeddings = body.get("embeddings")
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise ProviderError(
                f"embed returned {0 if not isinstance(embeddings, list) else len(embeddings)} "
                f"vectors for {len(texts)} texts"
            )
        matrix = np.asarray(embeddings, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != EMBEDDING_DIM:
            got = matrix.shape[1] if matrix.ndim == 2 else "ragged"
            raise DimensionMismatchError(f"expected dimension {EMBEDDING_DIM}, received {got}")
        return normalize_rows(matrix)


def _post_json(url: str, payload: dict, headers: dict, timeout: float, retry_count: int) -> dict:
    last_error = None
    for attempt in range(retry_count + 1):
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last_error = exc
            if attempt < retry_count:
                time.sleep(min(0.2 * 2 ** attempt, 2.0))
            continue
        if resp.status_code != 200:
            try:
                detail = resp.json().get("error", resp.text)
            except ValueError:
                detail = resp.text
            raise ProviderError(f"{url} returned {resp.status_code}: {detail}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderError(f"{url} returned non-JSON body") from exc
    raise ProviderError(f"provider unreachable after {retry_count + 1} attempts: {last_error}")


class EmbeddingCache:
    """Persistent content-addressed embedding cache.

    Keys are ``{provider identity}:{sha256 of text}`` so enrichment variants of
    the same keyword never collide. Storage is append-only JSONL; values
    round-trip bit-identically because JSON serializes the shortest repr of
    each float. Writes are serialized with a lock.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._store: dict[str, np.ndarray] = {}
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._store[rec["k"]] = np.asarray(rec["v"], dtype=np.float64)

    @staticmethod
    def key(identity: str, text: str) -> str:
        return identity + ":" + hashlib.sha256(text.encode("utf-8")).hexdigest()

    def get(self, key: str):
        return self._store.get(key)

    def put(self, key: str, vector: np.ndarray) -> None:
        with self._lock:
            if key in self._store:
                return
            self._store[key] = vector
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"k": key, "v": vector.tolist()}) + "\n")

    def __len__(self) -> int:
        return len(self._store)


class EmbeddingClient:
    """Validating front end over an embedding backend with optional caching."""

    def __init__(self, backend, cache: EmbeddingCache | None = None):
        self.backend = backend
        self.cache = cache if cache is not None else EmbeddingCache(None)

    @property
    def identity(self) -> str:
        return self.backend.identity

    def embed(self, texts) -> np.ndarray:
        """Embed texts in order; every returned row is unit-norm, length 768."""
        texts = list(texts)
        if not texts:
            return np.zeros((0, EMBEDDING_DIM), dtype=np.float64)
        if any(not t for t in texts):
            raise ValueError("embed requires non-empty texts")
        keys = [EmbeddingCache.key(self.identity, t) for t in texts]
        out: list[np.ndarray | None] = [self.cache.get(k) for k in keys]
        missing = [i for i, v in enumerate(out) if v is None]
        if missing:
            fresh = self.backend.embed_batch([texts[i] for i in missing])
            if fresh.shape != (len(missing), EMBEDDING_DIM):
                raise DimensionMismatchError(
                    f"expected shape {(len(missing), EMBEDDING_DIM)}, received {fresh.shape}"
                )
            fresh = normalize_rows(fresh)
            for row, i in enumerate(missing):
                self.cache.put(keys[i], fresh[row])
                out[i] = fresh[row]
        return np.stack(out)

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]


_GENERIC_WORDS: frozenset | None = None


def _generic_words() -> frozenset:
    global _GENERIC_WORDS
    if _GENERIC_WORDS is None:
        from importlib import resources

        data = resources.files("labelkit.data").joinpath("stopwords_en.txt").read_text("utf-8")
        words = set()
        for line in data.splitlines():
            token = line.split("#", 1)[0].strip().lower()
            if token:
                words.add(token)
        _GENERIC_WORDS = frozenset(words)
    return _GENERIC_WORDS


class MockMetadataGenerator:
    """Offline metadata backend: a pure function of (keyword, abstract).

    The contextual definition lists the abstract's most frequent content
    tokens, excluding the keyword's own tokens and generic stopwords, so
    enrichment stays inside the document's vocabulary.
    """

    identity = "mock-metadata-v1"

    def generate(self, abstract: str, keywords) -> list[MetadataRecord]:
        tokens = _WORD_RE.findall(abstract.lower())
        counts: dict[str, int] = {}
        first_pos: dict[str, int] = {}
        for pos, tok in enumerate(tokens):
            counts[tok] = counts.get(tok, 0) + 1
            first_pos.setdefault(tok, pos)
        generic = _generic_words()
        records = []
        for kw in keywords:
            own = set(_WORD_RE.findall(kw.lower()))
            ranked = sorted(
                (t for t in counts
                 if t not in own and len(t) > 2 and t not in generic),
                key=lambda t: (-counts[t], first_pos[t]),
            )
            context = ranked[:6]
            if context:
                text = f"{kw} relates to {', '.join(context)}"
            else:
                text = f"{kw} as used in this abstract"
            records.append(MetadataRecord(keyword=kw, metadata_text=text))
        return records


class HttpMetadataGenerator:
    """Metadata backend that POSTs to {base}/metadata per the wire protocol."""

    def __init__(self, base_url: str, timeout: float = 30.0, retry_count: int = 2,
                 bearer_token: str | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retry_count = retry_count
        self.identity = f"http:{self.base_url}"
        self._headers = {"Content-Type": "application/json"}
        if bearer_token:
            self._headers["Authorization"] = f"Bearer {bearer_token}"

    def generate(self, abstract: str, keywords) -> list[MetadataRecord]:
        keywords = list(keywords)
        payload = {"abstract": abstract, "keywords": keywords}
        body = _post_json(f"{self.base_url}/metadata", payload, self._headers,
                          self.timeout, self.retry_count)
        entries = body.get("metadata")
        if not isinstance(entries, list) or len(entries) != len(keywords):
            raise ProviderError(
                f"metadata returned {0 if not isinstance(entries, list) else len(entries)} "
                f"records for {len(keywords)} keywords"
            )
        records = []
        for kw, entry in zip(keywords, entries):
            if not isinstance(entry, dict) or entry.get("keyword") != kw:
                raise ProviderError(f"metadata response missing keyword {kw!r}")
            text = entry.get("text")
            if not text or not isinstance(text, str):
                raise ProviderError(f"metadata response has empty text for keyword {kw!r}")
            records.append(MetadataRecord(keyword=kw, metadata_text=text))
        return records


class MetadataClient:
    """Validating front end over a metadata backend."""

    def __init__(self, backend):
        self.backend = backend

    @property
    def identity(self) -> str:
        return self.backend.identity

    def generate_metadata(self, abstract: str, keywords) -> list[MetadataRecord]:
        """One record per keyword, order preserved."""
        keywords = list(keywords)
        if not abstract:
            raise ValueError("abstract must be non-empty")
        if not keywords:
            raise ValueError("keywords must be non-empty")
        records = self.backend.generate(abstract, keywords)
        if len(records) != len(keywords):
            raise ProviderError(f"{len(records)} records for {len(keywords)} keywords")
        for kw, rec in zip(keywords, records):
            if rec.keyword != kw:
                raise ProviderError(f"metadata records out of order: expected {kw!r}, got {rec.keyword!r}")
        return records


def concat_for_embedding(record: MetadataRecord, include_metadata: bool = True) -> str:
    """Text embedded for one keyword: 'keyword: metadata', or the keyword alone
    when enrichment is disabled (ablation mode).

    Metadata that merely repeats the keyword adds nothing, so it embeds as the
    bare keyword too; enrichment is then a true no-op.
    """
    if not include_metadata:
        return record.keyword
    if record.metadata_text.strip().lower() == record.keyword.strip().lower():
        return record.keyword
    return f"{record.keyword}: {record.metadata_text}"


@dataclass
class Providers:
    """The pair of clients every pipeline stage consumes."""

    embedder: EmbeddingClient
    metadata: MetadataClient

    @property
    def identity(self) -> str:
        return f"{self.embedder.identity}+{self.metadata.identity}"


def make_providers(config: ProviderConfig) -> Providers:
    """Build provider clients from config, honoring env-var endpoint overrides."""
    embed_ep = os.environ.get("AI_EMBED_URL", config.embed_endpoint)
    meta_ep = os.environ.get("AI_METADATA_URL", config.metadata_endpoint)
    cache = EmbeddingCache(config.cache_path)
    if embed_ep == "mock":
        embed_backend = MockEmbedder()
    else:
        embed_backend = HttpEmbedder(embed_ep, config.timeout, config.retry_count,
                                     config.bearer_token)
    if meta_ep == "mock":
        meta_backend = MockMetadataGenerator()
    else:
        meta_backend = HttpMetadataGenerator(meta_ep, config.timeout, config.retry_count,
                                             config.bearer_token)
    return Providers(EmbeddingClient(embed_backend, cache), MetadataClient(meta_backend))
