"""Keyword extraction: statistical candidate ranking plus MMR diversification.

Candidate phrases are scored with five unsupervised statistics (term
frequency, sentence position, casing, sentence spread and context diversity);
a lower raw score is better. The final keyword set is then selected with
Maximal Marginal Relevance against the document embedding, trading relevance
against novelty.
"""

from __future__ import annotations

import json
import math
import re
import statistics
from dataclasses import dataclass
from difflib import SequenceMatcher
from importlib import resources

import numpy as np

from .corpus import Document
from .providers import MetadataRecord, Providers, concat_for_embedding

# Near-duplicate candidates above this similarity ratio collapse into the
# better-scored one.
DEDUP_RATIO = 0.9

_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+|\n+")
_CHUNK_SPLIT_RE = re.compile(r"[^\w\s'\-]+")
_TOKEN_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9'\-]*")


class ExtractionError(Exception):
    """Raised when a document cannot yield keyword candidates."""


@dataclass(frozen=True)
class ExtractionParams:
    """Knobs for candidate generation, enrichment and MMR selection."""

    keyword_count: int = 5
    candidate_pool: int = 10
    max_ngram: int = 3
    mmr_lambda: float = 0.7
    enrich: bool = True
    query_on_raw: bool = False

    def __post_init__(self):
        if self.keyword_count < 1:
            raise ValueError("keyword_count must be >= 1")
        if self.candidate_pool < self.keyword_count:
            raise ValueError("candidate_pool must be >= keyword_count")
        if self.max_ngram < 1:
            raise ValueError("max_ngram must be >= 1")
        if not 0.0 <= self.mmr_lambda <= 1.0:
            raise ValueError("mmr_lambda must be in [0, 1]")


@dataclass
class KeywordSet:
    """The selected keywords of one document, with optional enrichment."""

    doc_id: str
    keywords: list  # (text, score) pairs, selection order
    metadata: list | None = None  # MetadataRecord per keyword, parallel

    def texts(self) -> list[str]:
        return [t for t, _ in self.keywords]


def default_extraction_stopwords() -> frozenset:
    """English stopword list used to delimit candidate phrases."""
    data = resources.files("labelkit.data").joinpath("stopwords_en.txt").read_text("utf-8")
    words = set()
    for line in data.splitlines():
        token = line.split("#", 1)[0].strip().lower()
        if token:
            words.add(token)
    return frozenset(words)


_DEFAULT_STOPWORDS: frozenset | None = None


def _extraction_stopwords() -> frozenset:
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = default_extraction_stopwords()
    return _DEFAULT_STOPWORDS


class _Term:
    """Accumulated statistics for one lowercased term."""

    __slots__ = ("tf", "tf_upper", "tf_acronym", "sentences", "left", "right",
                 "first_offset", "stopword")

    def __init__(self, stopword: bool, first_offset: int):
        self.tf = 0
        self.tf_upper = 0
        self.tf_acronym = 0
        self.sentences: set[int] = set()
        self.left: dict[str, int] = {}
        self.right: dict[str, int] = {}
        self.first_offset = first_offset
        self.stopword = stopword


def _is_content_token(token: str) -> bool:
    # Purely numeric or single-character tokens never enter candidates.
    return len(token) > 1 and any(ch.isalpha() for ch in token)


def _tokenize(text: str):
    """Text -> list of sentences, each a list of chunks, each a list of tokens.

    Chunks are maximal punctuation-free runs; candidate phrases never cross a
    chunk boundary.
    """
    sentences = []
    for raw_sent in _SENT_SPLIT_RE.split(text):
        if not raw_sent.strip():
            continue
        chunks = []
        for raw_chunk in _CHUNK_SPLIT_RE.split(raw_sent):
            tokens = _TOKEN_RE.findall(raw_chunk)
            if tokens:
                chunks.append(tokens)
        if chunks:
            sentences.append(chunks)
    return sentences


def _collect_terms(sentences, stopwords):
    terms: dict[str, _Term] = {}
    offset = 0
    for sent_idx, chunks in enumerate(sentences):
        sent_token_idx = 0
        for chunk in chunks:
            lowers = [t.lower() for t in chunk]
            for pos, (surface, lower) in enumerate(zip(chunk, lowers)):
                term = terms.get(lower)
                if term is None:
                    term = _Term(lower in stopwords, offset)
                    terms[lower] = term
                term.tf += 1
                term.sentences.add(sent_idx)
                if surface[0].isupper() and sent_token_idx > 0:
                    term.tf_upper += 1
                if len(surface) > 1 and surface.isupper():
                    term.tf_acronym += 1
                if pos > 0:
                    prev = lowers[pos - 1]
                    term.left[prev] = term.left.get(prev, 0) + 1
                    prev_term = terms[prev]
                    prev_term.right[lower] = prev_term.right.get(lower, 0) + 1
                offset += 1
                sent_token_idx += 1
    return terms


def _term_scores(terms, n_sentences):
    """Single-term importance scores; lower means more informative."""
    content_tfs = [t.tf for lw, t in terms.items()
                   if not t.stopword and _is_content_token(lw)]
    if not content_tfs:
        return {}
    mean_tf = statistics.mean(content_tfs)
    std_tf = statistics.stdev(content_tfs) if len(content_tfs) > 1 else 0.0
    max_tf = max(t.tf for t in terms.values())
    scores = {}
    for lower, term in terms.items():
        casing = max(term.tf_upper, term.tf_acronym) / (1.0 + math.log(term.tf))
        position = math.log(math.log(3.0 + statistics.median(sorted(term.sentences))))
        frequency = term.tf / (mean_tf + std_tf) if (mean_tf + std_tf) > 0 else 0.0
        left_diversity = len(term.left) / sum(term.left.values()) if term.left else 0.0
        right_diversity = len(term.right) / sum(term.right.values()) if term.right else 0.0
        relatedness = 1.0 + (left_diversity + right_diversity) * (term.tf / max_tf)
        spread = len(term.sentences) / n_sentences
        scores[lower] = (relatedness * position) / (
            casing + frequency / relatedness + spread / relatedness
        )
    return scores


def _candidate_score(tokens, terms, scores, tf_candidate):
    """Aggregate an n-gram's score from its member terms.

    Interior stopwords do not contribute their own score; instead the phrase
    is penalized by how loosely the stopword binds to its neighbors (adjacent
    co-occurrence probability).
    """
    prod = 1.0
    total = 0.0
    for i, tok in enumerate(tokens):
        term = terms[tok]
        if term.stopword:
            prev_t = terms[tokens[i - 1]]
            prob_left = prev_t.right.get(tok, 0) / prev_t.tf
            prob_right = term.right.get(tokens[i + 1], 0) / term.tf
            looseness = 1.0 - prob_left * prob_right
            prod *= 1.0 + looseness
            total += looseness
        else:
            prod *= scores[tok]
            total += scores[tok]
    return prod / (tf_candidate * (1.0 + total))


def rank_candidates(text: str, max_ngram: int = 3, limit: int | None = None,
                    stopwords=None):
    """Rank candidate keyphrases of a text, best first.

    Returns (phrase, raw_score) pairs where lower raw score is better.
    Candidates are n-grams (n <= max_ngram) inside one punctuation-free chunk
    that neither start nor end with a stopword, contain no numeric or
    single-character token, and never repeat a token back-to-back.
    Near-duplicates (similarity ratio >= 0.9) collapse into the better one.
    """
    if stopwords is None:
        stopwords = _extraction_stopwords()
    sentences = _tokenize(text)
    if not sentences:
        raise ExtractionError("no tokens in document")
    terms = _collect_terms(sentences, stopwords)
    scores = _term_scores(terms, len(sentences))
    if not scores:
        raise ExtractionError("no content terms in document")

    # Gather candidate occurrences: text -> [tf, first_offset, tokens]
    candidates: dict[str, list] = {}
    offset = 0
    for chunks in sentences:
        for chunk in chunks:
            lowers = [t.lower() for t in chunk]
            for start in range(len(lowers)):
                for n in range(1, max_ngram + 1):
                    end = start + n
                    if end > len(lowers):
                        break
                    gram = lowers[start:end]
                    if not _valid_candidate(gram, stopwords):
                        continue
                    phrase = " ".join(gram)
                    entry = candidates.get(phrase)
                    if entry is None:
                        candidates[phrase] = [1, offset + start, gram]
                    else:
                        entry[0] += 1
            offset += len(lowers)

    ranked = []
    for phrase, (tf_cand, first, gram) in candidates.items():
        raw = _candidate_score(gram, terms, scores, tf_cand)
        ranked.append((phrase, raw, first))
    ranked.sort(key=lambda item: (item[1], item[2], item[0]))

    kept: list[tuple[str, float]] = []
    for phrase, raw, _ in ranked:
        if any(SequenceMatcher(None, phrase, prev).ratio() >= DEDUP_RATIO
               for prev, _ in kept):
            continue
        kept.append((phrase, raw))
        if limit is not None and len(kept) >= limit:
            break
    return kept


def _valid_candidate(gram, stopwords) -> bool:
    if gram[0] in stopwords or gram[-1] in stopwords:
        return False
    for i, tok in enumerate(gram):
        if i > 0 and tok == gram[i - 1]:
            return False
        if tok not in stopwords and not _is_content_token(tok):
            return False
    return True


def extract_candidates(doc: Document, params: ExtractionParams, stopwords=None):
    """Ranked candidate keyphrases of a document, best first.

    Scores are exposed rank-normalized to (0, 1], higher is better; the raw
    statistical scores are an implementation detail.
    """
    if doc.is_empty:
        raise ExtractionError(f"document {doc.id!r} has empty clean_text")
    token_count = len(_TOKEN_RE.findall(doc.clean_text))
    if token_count < params.max_ngram:
        raise ExtractionError(
            f"document {doc.id!r} has {token_count} tokens, fewer than max_ngram={params.max_ngram}"
        )
    ranked = rank_candidates(doc.clean_text, params.max_ngram,
                             limit=params.candidate_pool, stopwords=stopwords)
    return [(text, 1.0 / (1.0 + raw)) for text, raw in ranked]


def mmr_select(query_vec: np.ndarray, candidates, lambda_: float, count: int) -> list[str]:
    """Greedy Maximal Marginal Relevance selection.

    Picks ``count`` items from ``candidates`` (a sequence of (text, vector)
    pairs): the first by pure relevance to the query, each next maximizing
    ``lambda * cos(c, query) - (1 - lambda) * max_selected cos(c, s)``.
    Ties break toward earlier input order. All vectors must be unit-norm.
    """
    if not 0.0 <= lambda_ <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lambda_}")
    texts = [t for t, _ in candidates]
    if count > len(texts):
        raise ValueError(f"cannot select {count} from {len(texts)} candidates")
    if count == 0:
        return []
    matrix = np.stack([np.asarray(v, dtype=np.float64) for _, v in candidates])
    query = np.asarray(query_vec, dtype=np.float64)
    for name, arr in (("query", query[None, :]), ("candidate", matrix)):
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError(f"{name} vectors must be unit-norm")

    relevance = matrix @ query
    selected = [int(np.argmax(relevance))]
    remaining = [i for i in range(len(texts)) if i != selected[0]]
    while len(selected) < count:
        sel_matrix = matrix[selected]
        best_idx = None
        best_val = -np.inf
        for i in remaining:
            novelty_penalty = float(np.max(sel_matrix @ matrix[i]))
            value = lambda_ * relevance[i] - (1.0 - lambda_) * novelty_penalty
            if value > best_val:
                best_val = value
                best_idx = i
        selected.append(best_idx)
        remaining.remove(best_idx)
    return [texts[i] for i in selected]


def embedding_texts(keyword_set: KeywordSet, include_metadata: bool = True) -> list[str]:
    """The strings embedded for a keyword set, one per keyword."""
    if include_metadata and keyword_set.metadata:
        return [concat_for_embedding(rec) for rec in keyword_set.metadata]
    return keyword_set.texts()


def extract_keywords(doc: Document, params: ExtractionParams,
                     providers: Providers, stopwords=None) -> KeywordSet:
    """Full per-document extraction: candidates, enrichment, embeddings, MMR.

    The candidate pool is enriched (when enabled), embedded as
    keyword-metadata concatenations and reduced to ``keyword_count`` diverse
    keywords by MMR against the embedded document text.
    """
    candidates = extract_candidates(doc, params, stopwords=stopwords)
    cand_texts = [t for t, _ in candidates]
    scores = dict(candidates)

    if params.enrich:
        records = providers.metadata.generate_metadata(doc.clean_text, cand_texts)
        embed_inputs = [concat_for_embedding(r) for r in records]
        by_keyword = {r.keyword: r for r in records}
    else:
        records = None
        embed_inputs = cand_texts
        by_keyword = {}

    vectors = providers.embedder.embed(embed_inputs)
    query_text = doc.raw_text if params.query_on_raw else doc.clean_text
    query_vec = providers.embedder.embed_one(query_text)

    if len(cand_texts) < params.keyword_count:
        raise ExtractionError(
            f"document {doc.id!r} yielded {len(cand_texts)} candidates, "
            f"need {params.keyword_count}"
        )
    chosen = mmr_select(query_vec, list(zip(cand_texts, vectors)),
                        params.mmr_lambda, params.keyword_count)
    keywords = [(text, scores[text]) for text in chosen]
    metadata = [by_keyword[text] for text in chosen] if records is not None else None
    return KeywordSet(doc_id=doc.id, keywords=keywords, metadata=metadata)


def save_keyword_sets(keyword_sets, path, provenance: dict | None = None) -> None:
    """Write keyword sets as JSONL: {"id", "keywords": [{"text","score","metadata"}]}.

    An optional provenance header line comes first.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if provenance is not None:
            fh.write(json.dumps({"provenance": provenance}, ensure_ascii=False) + "\n")
        for ks in keyword_sets:
            entries = []
            for i, (text, score) in enumerate(ks.keywords):
                entry = {"text": text, "score": score}
                entry["metadata"] = ks.metadata[i].metadata_text if ks.metadata else None
                entries.append(entry)
            fh.write(json.dumps({"id": ks.doc_id, "keywords": entries}, ensure_ascii=False) + "\n")


def load_keyword_sets(path) -> list[KeywordSet]:
    sets = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "provenance" in rec and "id" not in rec:
                continue
            keywords = [(e["text"], e["score"]) for e in rec["keywords"]]
            metadata = None
            if rec["keywords"] and rec["keywords"][0].get("metadata") is not None:
                metadata = [MetadataRecord(e["text"], e["metadata"]) for e in rec["keywords"]]
            sets.append(KeywordSet(doc_id=rec["id"], keywords=keywords, metadata=metadata))
    return sets
