"""Corpus ingestion, domain-stopword preprocessing and train/test splitting."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class CorpusError(Exception):
    """Raised when a corpus file cannot be parsed or violates an invariant."""


class DuplicateIdError(CorpusError):
    """Raised when two records in one corpus share an id."""


# Punctuation stripped from token edges before stopword comparison.
_EDGE_PUNCT = ".,;:!?()[]{}\"'`<>@#$%^&*_~/\\|+=-"


@dataclass(frozen=True)
class Document:
    """One abstract: identity, raw text and its preprocessed form."""

    id: str
    year: int
    title: str
    raw_text: str
    clean_text: str

    @property
    def is_empty(self) -> bool:
        """True when preprocessing removed every token."""
        return not self.clean_text


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test split parameters."""

    seed: int
    test_fraction: float

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")


class Corpus:
    """An ordered, immutable collection of documents plus its stopword set."""

    def __init__(self, documents, stopwords):
        self.documents = tuple(documents)
        self.stopwords = frozenset(w.lower() for w in stopwords)
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise DuplicateIdError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i) -> Document:
        return self.documents[i]

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def content_hash(self) -> str:
        """Stable hash of document identities and raw texts, for provenance."""
        h = hashlib.sha256()
        for doc in self.documents:
            h.update(doc.id.encode("utf-8"))
            h.update(b"\x00")
            h.update(doc.raw_text.encode("utf-8"))
            h.update(b"\x01")
        return h.hexdigest()

    def save(self, path) -> None:
        """Write the corpus back out as JSONL, one record per document."""
        with open(path, "w", encoding="utf-8") as fh:
            for doc in self.documents:
                rec = {
                    "id": doc.id,
                    "year": doc.year,
                    "title": doc.title,
                    "abstract": doc.raw_text,
                    "clean_text": doc.clean_text,
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _strip_edges(token: str) -> str:
    return token.strip(_EDGE_PUNCT)


def preprocess_text(text: str, stopwords) -> str:
    """Lowercase, drop stopword tokens (whole-token, edge punctuation ignored), rejoin.

    Tokens are produced by splitting on whitespace; a token is removed when its
    lowercased, punctuation-stripped form is in ``stopwords``. Surviving tokens
    keep their punctuation so sentence boundaries remain visible downstream.
    Idempotent: applying this to its own output changes nothing.
    """
    kept = []
    for token in text.split():
        if _strip_edges(token.lower()) in stopwords:
            continue
        kept.append(token.lower())
    return " ".join(kept)


def default_stopwords() -> frozenset:
    """Domain stopword list bundled with the package."""
    data = resources.files("labelkit.data").joinpath("stopwords_domain.txt").read_text("utf-8")
    return _parse_stopword_lines(data.splitlines())


def load_stopwords(path) -> frozenset:
    """Read a stopword config file: one token per line, '#' starts a comment."""
    with open(path, encoding="utf-8") as fh:
        return _parse_stopword_lines(fh)


def _parse_stopword_lines(lines) -> frozenset:
    words = set()
    for line in lines:
        token = line.split("#", 1)[0].strip().lower()
        if token:
            words.add(token)
    return frozenset(words)


def ingest(path, stopwords, include_titles: bool = False) -> Corpus:
    """Load a JSONL corpus file and preprocess every abstract.

    Each line must be an object with fields id, year, title, abstract.
    With ``include_titles`` the title is prepended to the abstract before
    preprocessing; the default uses the abstract alone.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    stopword_set = frozenset(w.lower() for w in stopwords)
    documents = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc
            try:
                doc_id = str(rec["id"])
                year = int(rec["year"])
                title = str(rec["title"])
                abstract = str(rec["abstract"])
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: missing or invalid field: {exc}") from exc
            if doc_id in seen:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate document id: {doc_id!r}")
            seen.add(doc_id)
            raw = f"{title}\n{abstract}" if include_titles else abstract
            documents.append(
                Document(
                    id=doc_id,
                    year=year,
                    title=title,
                    raw_text=raw,
                    clean_text=preprocess_text(raw, stopword_set),
                )
            )
    return Corpus(documents, stopword_set)


def split(corpus: Corpus, spec: SplitSpec):
    """Partition a corpus into (train, test) deterministically.

    Scheme: shuffle the document indices with ``random.Random(seed)`` and take
    the first ``round(test_fraction * n)`` (half away from zero) as the test
    side. The same (seed, corpus) pair always yields the same split.
    """
    n = len(corpus)
    if n == 0:
        raise CorpusError("cannot split an empty corpus")
    test_size = int(spec.test_fraction * n + 0.5)
    test_size = min(max(test_size, 1), n - 1)
    indices = list(range(n))
    random.Random(spec.seed).shuffle(indices)
    test_idx = set(indices[:test_size])
    train_docs = [corpus[i] for i in range(n) if i not in test_idx]
    test_docs = [corpus[i] for i in range(n) if i in test_idx]
    return Corpus(train_docs, corpus.stopwords), Corpus(test_docs, corpus.stopwords)
