"""Label-space induction: seeded k-means over keyword embeddings, centroid naming.

The induced space is a list of named labels. Each name is the text of the
member keyword nearest its cluster centroid, and each label embedding is the
embedded name string (not the centroid), so downstream metrics operate on the
same kind of vectors the documents produce.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .extraction import ExtractionParams, embedding_texts, extract_keywords
from .providers import Providers, normalize_rows


class LabelSpaceError(Exception):
    """Raised when clustering or naming cannot satisfy its contract."""


@dataclass(frozen=True)
class ClusterParams:
    """Seeded k-means configuration."""

    k: int
    seed: int
    max_iters: int = 300
    tol: float = 1e-6
    restarts: int = 8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class Label:
    name: str
    embedding: np.ndarray
    member_count: int


class LabelSpace:
    """Named labels, their embedding matrix, and generation provenance."""

    def __init__(self, labels, params: ClusterParams, provenance: dict):
        self.labels = list(labels)
        self.params = params
        self.provenance = provenance
        names = [lb.name for lb in self.labels]
        if len(set(names)) != len(names):
            raise LabelSpaceError("label names must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.labels)

    def names(self) -> list[str]:
        return [lb.name for lb in self.labels]

    def matrix(self) -> np.ndarray:
        """Label embeddings stacked row-wise: shape (k, dim)."""
        return np.stack([lb.embedding for lb in self.labels])

    def provenance_hash(self) -> str:
        """Stable digest of params, provenance and label names.

        Annotation sessions are keyed on this so each configuration keeps its
        own gold labels.
        """
        payload = json.dumps(
            {"params": asdict(self.params), "provenance": self.provenance,
             "names": self.names()},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "labels": [
                {
                    "name": lb.name,
                    "embedding": lb.embedding.tolist(),
                    "member_count": lb.member_count,
                }
                for lb in self.labels
            ],
            "provenance": self.provenance,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "LabelSpace":
        params = ClusterParams(**data["params"])
        labels = [
            Label(
                name=entry["name"],
                embedding=np.asarray(entry["embedding"], dtype=np.float64),
                member_count=int(entry["member_count"]),
            )
            for entry in data["labels"]
        ]
        return cls(labels, params, data.get("provenance", {}))

    @classmethod
    def load(cls, path) -> "LabelSpace":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centroids by squared-distance sampling."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            probs = d2 / total
            idx = int(rng.choice(n, p=probs))
        else:
            # All remaining mass at already-chosen locations; pick a new index.
            unchosen = [i for i in range(n) if i not in chosen]
            idx = unchosen[int(rng.integers(len(unchosen)))]
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _assign(points: np.ndarray, centroids: np.ndarray, points_sq=None):
    """Nearest centroid per point (ties toward the lower index) and the
    within-cluster sum of squares of that assignment."""
    if points_sq is None:
        points_sq = np.sum(points ** 2, axis=1)
    d2 = (
        points_sq[:, None]
        - 2.0 * points @ centroids.T
        + np.sum(centroids ** 2, axis=1)[None, :]
    )
    assignments = np.argmin(d2, axis=1)
    # Squared distances can go slightly negative from cancellation.
    wcss = float(np.sum(np.maximum(d2[np.arange(len(points)), assignments], 0.0)))
    return assignments, wcss


def _mean_update(points: np.ndarray, assignments: np.ndarray, centroids: np.ndarray):
    k = centroids.shape[0]
    sums = np.zeros_like(centroids)
    np.add.at(sums, assignments, points)
    counts = np.bincount(assignments, minlength=k)
    updated = centroids.copy()
    nonempty = counts > 0
    updated[nonempty] = sums[nonempty] / counts[nonempty, None]
    return updated, counts


def _lloyd(points: np.ndarray, initial: np.ndarray, max_iters: int, tol: float):
    points_sq = np.sum(points ** 2, axis=1)
    centroids = initial.copy()
    assignments, prev_wcss = _assign(points, centroids, points_sq)
    for _ in range(max_iters):
        new_centroids, counts = _mean_update(points, assignments, centroids)
        # Re-seed empty clusters from the point farthest from its centroid.
        reseeded = bool(np.any(counts == 0))
        for j in np.flatnonzero(counts == 0):
            residual = np.sum((points - new_centroids[assignments]) ** 2, axis=1)
            farthest = int(np.argmax(residual))
            new_centroids[j] = points[farthest]
            assignments, _ = _assign(points, new_centroids, points_sq)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        new_assignments, cur_wcss = _assign(points, centroids, points_sq)
        # A reseeded centroid sits on a data point, not a cluster mean, so an
        # unchanged assignment is not yet a fixed point in that case.
        stable = not reseeded and bool(np.array_equal(new_assignments, assignments))
        assignments = new_assignments
        assert cur_wcss <= prev_wcss + 1e-9 * max(1.0, prev_wcss), \
            "within-cluster sum of squares increased"
        prev_wcss = cur_wcss
        if shift < tol or stable:
            break
    return assignments, centroids, prev_wcss


def kmeans(points, params: ClusterParams):
    """Seeded k-means: k-means++ init, Lloyd iterations, best of N restarts.

    Returns (assignments, centroids). Deterministic given (points, params);
    restarts use independent child seeds and the best run is chosen by
    within-cluster sum of squares, ties toward the lowest restart index.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n = points.shape[0]
    if n < params.k:
        raise LabelSpaceError(f"cannot form {params.k} clusters from {n} points")
    seeds = np.random.SeedSequence(params.seed).spawn(params.restarts)
    best = None
    for child in seeds:
        rng = np.random.default_rng(child)
        initial = _plus_plus_init(points, params.k, rng)
        assignments, centroids, wcss = _lloyd(points, initial, params.max_iters, params.tol)
        if best is None or wcss < best[2]:
            best = (assignments, centroids, wcss)
    return best[0], best[1]


def name_clusters(keywords, assignments, centroids, providers: Providers,
                  params: ClusterParams, provenance: dict | None = None) -> LabelSpace:
    """Name each cluster by its member keyword nearest the centroid.

    ``keywords`` is a sequence of (text, unit vector) pairs aligned with
    ``assignments``. When the nearest member's text is already taken by an
    earlier cluster, the next-nearest member with an unused text is chosen,
    keeping names pairwise distinct while still drawn from the data.
    """
    assignments = np.asarray(assignments)
    texts = [t for t, _ in keywords]
    vectors = np.stack([np.asarray(v, dtype=np.float64) for _, v in keywords])
    if len(texts) != len(assignments):
        raise LabelSpaceError("assignments are not aligned with keywords")
    k = centroids.shape[0]
    used: set[str] = set()
    names: list[str] = []
    counts: list[int] = []
    for j in range(k):
        member_idx = np.flatnonzero(assignments == j)
        if len(member_idx) == 0:
            raise LabelSpaceError(f"cluster {j} is empty")
        centroid = centroids[j]
        norm = np.linalg.norm(centroid)
        if norm == 0.0:
            raise LabelSpaceError(f"cluster {j} has a zero centroid")
        unit_centroid = centroid / norm
        # Per-member scalar dots: a two-member cluster puts both members at
        # mathematically equal similarity, and a batched matmul can round the
        # tie differently than any scalar re-computation would. Ties then
        # break toward input order via the stable sort.
        sims = np.array([float(vectors[i] @ unit_centroid) for i in member_idx])
        order = member_idx[np.argsort(-sims, kind="stable")]
        name = next((texts[i] for i in order if texts[i] not in used), None)
        if name is None:
            raise LabelSpaceError(f"cluster {j} has no unused keyword text for a name")
        used.add(name)
        names.append(name)
        counts.append(int(len(member_idx)))
    embeddings = normalize_rows(providers.embedder.embed(names))
    labels = [Label(name=n, embedding=embeddings[i], member_count=counts[i])
              for i, n in enumerate(names)]
    return LabelSpace(labels, params, provenance or {})


def corpus_keyword_vectors(corpus: Corpus, extraction: ExtractionParams,
                           providers: Providers):
    """Extract and embed keywords for every non-empty document.

    Returns (keyword_sets, pairs) where pairs is the corpus-wide pool of
    (keyword text, unit vector), one entry per keyword occurrence. Documents
    whose preprocessing removed every token are skipped.
    """
    keyword_sets = []
    pairs = []
    for doc in corpus:
        if doc.is_empty:
            continue
        ks = extract_keywords(doc, extraction, providers, stopwords=None)
        vectors = providers.embedder.embed(embedding_texts(ks, extraction.enrich))
        keyword_sets.append(ks)
        pairs.extend(zip(ks.texts(), vectors))
    return keyword_sets, pairs


def generate_label_space(corpus: Corpus, extraction: ExtractionParams,
                         cluster: ClusterParams, providers: Providers,
                         out_path=None) -> LabelSpace:
    """Full induction pipeline: extract, enrich, embed, cluster, name.

    Pools one embedding per keyword occurrence corpus-wide (enrichment makes
    the same keyword text document-specific), clusters the pool and names the
    clusters. Optionally persists the result as JSON.
    """
    if len(corpus) == 0:
        raise LabelSpaceError("corpus is empty")
    _, pairs = corpus_keyword_vectors(corpus, extraction, providers)
    if not pairs:
        raise LabelSpaceError("no keywords extracted from corpus")
    vectors = np.stack([v for _, v in pairs])
    assignments, centroids = kmeans(vectors, cluster)
    provenance = {
        "corpus_hash": corpus.content_hash(),
        "extraction": asdict(extraction),
        "cluster": asdict(cluster),
        "providers": providers.identity,
    }
    space = name_clusters(pairs, assignments, centroids, providers, cluster, provenance)
    if out_path is not None:
        space.save(out_path)
    return space
