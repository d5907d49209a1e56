"""Embedding backends for the sidecar.

The contract: ``embed(texts)`` returns one unit-norm float vector of
dimension 768 per text, deterministically within a server session.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DIMENSION = 768

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")


class EmbedderError(Exception):
    """Raised when a backend cannot be constructed or violates the contract."""


class HashEmbedder:
    """Deterministic model-free backend: token bins plus a bigram component.

    Exists so the server (and its conformance suite) runs in environments
    without model weights; the vectors carry coarse lexical similarity only.
    """

    name = "hash-embedder-v1"
    dimension = DIMENSION

    def embed(self, texts) -> np.ndarray:
        return np.stack([self._one(t) for t in texts])

    def _one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        tokens = _TOKEN_RE.findall(text.lower())
        for tok in tokens:
            vec[self._bin(tok)] += 1.0
        for pair in zip(tokens, tokens[1:]):
            vec[self._bin(" ".join(pair))] += 0.25
        if not tokens:
            vec[self._bin(text)] = 1.0
        return vec / np.linalg.norm(vec)

    def _bin(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dimension


class SentenceTransformerEmbedder:
    """Real model backend wrapping a sentence-transformers checkpoint."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EmbedderError(
                "sentence-transformers is not installed; install the 'models' "
                "extra or use SIDECAR_EMBED_MODEL=hash"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise EmbedderError(f"cannot load embedding model {model_name!r}: {exc}") from exc
        self.name = model_name
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def embed(self, texts) -> np.ndarray:
        vectors = self._model.encode(list(texts), convert_to_numpy=True,
                                     normalize_embeddings=False)
        vectors = np.asarray(vectors, dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return vectors / norms


def make_embedder(model_name: str):
    """Build a backend; the server refuses to start unless it is 768-d."""
    embedder = HashEmbedder() if model_name == "hash" else SentenceTransformerEmbedder(model_name)
    if embedder.dimension != DIMENSION:
        raise EmbedderError(
            f"embedding model {model_name!r} produces {embedder.dimension} dimensions, "
            f"the wire protocol requires {DIMENSION}"
        )
    return embedder
