"""Figures of merit for a label space: redundancy and coverage.

Redundancy is the maximum pairwise cosine similarity among distinct label
embeddings; near-zero means the labels are close to orthogonal. Coverage
projects a document's keyword embeddings onto the label space: per document
it is the best keyword-label alignment, per corpus the mean over documents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extraction import embedding_texts
from .labelspace import LabelSpace
from .providers import Providers

# Slack for the |entry| <= 1 bound on products of unit vectors.
COSINE_EPS = 1e-9


class MetricsError(Exception):
    """Raised when inputs violate a metric precondition."""


@dataclass
class RedundancyReport:
    value: float
    argmax_pair: tuple[int, int]
    full_matrix: np.ndarray  # k x k symmetric cosine matrix
    mean_offdiagonal: float  # diagnostic only, not a headline figure


@dataclass
class CoverageMatrix:
    """Projection of one document's keywords onto the labels: shape (k, c)."""

    doc_id: str
    entries: np.ndarray
    keyword_texts: list | None = None


@dataclass
class CoverageReport:
    per_document: dict  # doc_id -> document coverage
    corpus_value: float


def _as_label_matrix(space) -> np.ndarray:
    if isinstance(space, LabelSpace):
        return space.matrix()
    return np.asarray(space, dtype=np.float64)


def redundancy(space) -> RedundancyReport:
    """Maximum off-diagonal cosine similarity among label embeddings.

    Accepts a LabelSpace or a raw (k, dim) matrix; needs at least two labels.
    On ties the lexicographically first (i, j) pair with i < j is reported.
    """
    matrix = _as_label_matrix(space)
    k = matrix.shape[0]
    if k < 2:
        raise MetricsError(f"redundancy needs at least 2 labels, got {k}")
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise MetricsError("label embeddings must be nonzero")
    unit = matrix / norms
    full = unit @ unit.T
    off = full.copy()
    np.fill_diagonal(off, -np.inf)
    flat_idx = int(np.argmax(off))
    i, j = divmod(flat_idx, k)
    if i > j:
        i, j = j, i
    n_off = k * (k - 1)
    mean_off = float((full.sum() - np.trace(full)) / n_off)
    return RedundancyReport(
        value=float(off[i, j]),
        argmax_pair=(i, j),
        full_matrix=full,
        mean_offdiagonal=mean_off,
    )


def coverage_matrix(doc_id: str, keyword_vectors, space, keyword_texts=None) -> CoverageMatrix:
    """Inner products of every label embedding with every keyword embedding.

    ``keyword_vectors`` is a (c, dim) array of unit vectors (rows); the result
    entry [i, j] is dot(label_i, keyword_j).
    """
    labels = _as_label_matrix(space)
    keywords = np.asarray(keyword_vectors, dtype=np.float64)
    if keywords.ndim != 2:
        raise MetricsError("keyword vectors must form a 2-d array")
    if labels.shape[1] != keywords.shape[1]:
        raise MetricsError(
            f"dimension mismatch: labels are {labels.shape[1]}-d, keywords {keywords.shape[1]}-d"
        )
    entries = labels @ keywords.T
    if np.any(np.abs(entries) > 1.0 + COSINE_EPS):
        raise MetricsError("coverage entries exceed the unit-cosine bound; inputs not unit-norm?")
    return CoverageMatrix(doc_id=doc_id, entries=entries, keyword_texts=keyword_texts)


def coverage(matrices) -> CoverageReport:
    """Per-document and corpus coverage from precomputed coverage matrices.

    Document coverage is the maximum matrix entry; corpus coverage is the
    arithmetic mean over documents in input order.
    """
    matrices = list(matrices)
    if not matrices:
        raise MetricsError("coverage of an empty corpus is undefined")
    per_document = {}
    for cm in matrices:
        per_document[cm.doc_id] = float(np.max(cm.entries))
    corpus_value = float(np.mean([per_document[cm.doc_id] for cm in matrices]))
    return CoverageReport(per_document=per_document, corpus_value=corpus_value)


def document_matrices(keyword_sets, space: LabelSpace, providers: Providers,
                      include_metadata: bool = True) -> list[CoverageMatrix]:
    """Embed each document's keyword set and project it onto the label space."""
    matrices = []
    for ks in keyword_sets:
        texts = embedding_texts(ks, include_metadata)
        vectors = providers.embedder.embed(texts)
        matrices.append(coverage_matrix(ks.doc_id, vectors, space, keyword_texts=ks.texts()))
    return matrices


def coverage_of_corpus(keyword_sets, space: LabelSpace, providers: Providers,
                       include_metadata: bool = True) -> CoverageReport:
    """Coverage report straight from keyword sets (embeds then projects)."""
    return coverage(document_matrices(keyword_sets, space, providers, include_metadata))
