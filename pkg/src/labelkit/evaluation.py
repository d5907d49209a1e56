"""Gold annotations, micro-averaged scoring, and the sweep/ablation runners.

Annotations live in an append-only JSONL store keyed on (label-space hash,
document id) so interrupted sessions resume and each space configuration is
annotated independently. A gold label of null marks a document the annotator
judged to have no appropriate label; such documents are excluded from the
counts by default.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .assigner import AssignmentParams, assign_corpus
from .corpus import Corpus
from .extraction import ExtractionParams
from .labelspace import (
    ClusterParams,
    LabelSpace,
    corpus_keyword_vectors,
    generate_label_space,
    kmeans,
    name_clusters,
)
from .providers import Providers
from .spacemetrics import coverage, document_matrices, redundancy

# Stored as JSON null; in Python the unlabeled sentinel is None.
UNLABELED = None


class EvaluationError(Exception):
    """Raised when predictions and annotations cannot be reconciled."""


@dataclass(frozen=True)
class Annotation:
    doc_id: str
    label: str | None
    annotator: str
    timestamp: str
    space_hash: str


@dataclass
class EvalReport:
    threshold_percent: float | None
    precision: float
    recall: float
    f1: float
    true_positives: int
    predicted_total: int
    gold_total: int
    unlabeled_excluded: int

    def to_dict(self) -> dict:
        return {
            "threshold_percent": self.threshold_percent,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "counts": {
                "true_positives": self.true_positives,
                "predicted_total": self.predicted_total,
                "gold_total": self.gold_total,
                "unlabeled_excluded": self.unlabeled_excluded,
            },
        }


class AnnotationStore:
    """Append-only JSONL store of annotations."""

    def __init__(self, path):
        self.path = path

    def load(self) -> list:
        annotations = []
        try:
            fh = open(self.path, encoding="utf-8")
        except FileNotFoundError:
            return annotations
        with fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                annotations.append(Annotation(
                    doc_id=rec["doc_id"],
                    label=rec["label"],
                    annotator=rec.get("annotator", ""),
                    timestamp=rec.get("timestamp", ""),
                    space_hash=rec.get("space_hash", ""),
                ))
        return annotations

    def append(self, annotation: Annotation) -> None:
        rec = {
            "doc_id": annotation.doc_id,
            "label": annotation.label,
            "annotator": annotation.annotator,
            "timestamp": annotation.timestamp,
            "space_hash": annotation.space_hash,
        }
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def for_space(self, space_hash: str) -> dict:
        """Gold labels for one space configuration; later entries win."""
        gold = {}
        for ann in self.load():
            if ann.space_hash == space_hash:
                gold[ann.doc_id] = ann.label
        return gold


def annotate(corpus: Corpus, space: LabelSpace, store: AnnotationStore,
             annotator: str = "anonymous", input_fn=input, out=sys.stdout) -> int:
    """Interactive annotation session; returns how many documents were labeled.

    Presents each not-yet-annotated document with the numbered label list.
    Accepted responses: a label number, "s" to leave the document unlabeled,
    "q" to quit (the session resumes later thanks to the append-only store).
    """
    space_hash = space.provenance_hash()
    done = set(store.for_space(space_hash))
    names = space.names()
    added = 0
    for doc in corpus:
        if doc.id in done:
            continue
        out.write(f"\n--- document {doc.id} ({doc.year}) ---\n")
        if doc.title:
            out.write(doc.title + "\n")
        out.write(doc.clean_text + "\n\n")
        for i, name in enumerate(names, start=1):
            out.write(f"  {i}. {name}\n")
        while True:
            try:
                answer = input_fn(f"label 1-{len(names)}, [s]kip, [q]uit: ").strip().lower()
            except EOFError:
                return added
            if answer == "q":
                return added
            if answer == "s":
                label = UNLABELED
                break
            if answer.isdigit() and 1 <= int(answer) <= len(names):
                label = names[int(answer) - 1]
                break
            out.write(f"  invalid choice {answer!r}, enter 1-{len(names)}, s or q\n")
        store.append(Annotation(
            doc_id=doc.id,
            label=label,
            annotator=annotator,
            timestamp=datetime.now(timezone.utc).isoformat(),
            space_hash=space_hash,
        ))
        added += 1
    return added


def _gold_mapping(annotations) -> dict:
    if isinstance(annotations, dict):
        return dict(annotations)
    gold = {}
    for ann in annotations:
        gold[ann.doc_id] = ann.label
    return gold


def evaluate(predictions, annotations, threshold_percent: float | None = None,
             unlabeled: str = "exclude") -> EvalReport:
    """Micro-averaged precision/recall/F1 of predictions against gold labels.

    A document scores a true positive when its gold label appears anywhere in
    its predicted set; predicted_total sums predicted set sizes and gold_total
    counts gold-labeled documents. Unlabeled documents are excluded from all
    counts by default; with ``unlabeled="count-as-miss"`` they instead count
    one unmatchable gold label and keep their predictions in predicted_total.
    """
    if unlabeled not in ("exclude", "count-as-miss"):
        raise ValueError(f"unknown unlabeled mode: {unlabeled!r}")
    gold = _gold_mapping(annotations)
    by_doc = {p.doc_id: p for p in predictions}
    missing = [doc_id for doc_id in gold if doc_id not in by_doc]
    if missing:
        raise EvaluationError(f"no prediction for annotated documents: {missing[:5]}")

    tp = 0
    predicted_total = 0
    gold_total = 0
    unlabeled_excluded = 0
    for doc_id, label in gold.items():
        pred_names = set(by_doc[doc_id].names())
        if label is UNLABELED:
            if unlabeled == "exclude":
                unlabeled_excluded += 1
                continue
            gold_total += 1
            predicted_total += len(pred_names)
            continue
        gold_total += 1
        predicted_total += len(pred_names)
        if label in pred_names:
            tp += 1

    precision = tp / predicted_total if predicted_total else 0.0
    recall = tp / gold_total if gold_total else 0.0
    # 2PR/(P+R) computed from counts so P == R implies F1 == P bit-exactly.
    f1 = 2 * tp / (predicted_total + gold_total) if (predicted_total + gold_total) else 0.0
    return EvalReport(
        threshold_percent=threshold_percent,
        precision=precision,
        recall=recall,
        f1=f1,
        true_positives=tp,
        predicted_total=predicted_total,
        gold_total=gold_total,
        unlabeled_excluded=unlabeled_excluded,
    )


def write_csv(path, header, rows) -> None:
    """Write rows with an exact header; plot-tool-friendly stable formatting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def sweep_k(corpus: Corpus, extraction: ExtractionParams, cluster_base: ClusterParams,
            k_range, providers: Providers):
    """Regenerate the label space for each k and record (k, R, S) rows.

    Keyword extraction runs once; only clustering and naming vary with k.
    Deterministic for a fixed seed in ``cluster_base``.
    """
    k_values = sorted(set(int(k) for k in k_range))
    keyword_sets, pairs = corpus_keyword_vectors(corpus, extraction, providers)
    if not pairs:
        raise EvaluationError("no keywords extracted from corpus")
    if k_values and (k_values[0] < 2 or k_values[-1] > len(pairs)):
        raise ValueError(f"k range must lie within [2, {len(pairs)}]")
    vectors = np.stack([v for _, v in pairs])
    rows = []
    for k in k_values:
        params = replace(cluster_base, k=k)
        assignments, centroids = kmeans(vectors, params)
        space = name_clusters(pairs, assignments, centroids, providers, params,
                              provenance={"corpus_hash": corpus.content_hash()})
        r_value = redundancy(space).value
        report = coverage(document_matrices(keyword_sets, space, providers,
                                            extraction.enrich))
        rows.append((k, r_value, report.corpus_value))
    return rows


def sweep_threshold(predictions_by_t: dict, annotations, unlabeled: str = "exclude"):
    """One evaluation row (T, precision, recall, f1) per threshold.

    Asserts the recall column is non-decreasing in T, which nested retained
    sets guarantee.
    """
    rows = []
    prev_recall = -1.0
    for t in sorted(predictions_by_t):
        report = evaluate(predictions_by_t[t], annotations,
                          threshold_percent=t, unlabeled=unlabeled)
        assert report.recall >= prev_recall - 1e-12, \
            f"recall decreased at T={t}: {report.recall} < {prev_recall}"
        prev_recall = report.recall
        rows.append((t, report.precision, report.recall, report.f1))
    return rows


def predictions_per_threshold(keyword_sets, space: LabelSpace, providers: Providers,
                              t_set, include_metadata: bool = True,
                              dedupe: bool = True) -> dict:
    """Assign the same coverage matrices at several thresholds."""
    matrices = document_matrices(keyword_sets, space, providers, include_metadata)
    out = {}
    for t in t_set:
        params = AssignmentParams(threshold_percent=t, dedupe=dedupe)
        out[t] = assign_corpus(matrices, space, params)
    return out


def sweep_keywords(corpus: Corpus, c_range, extraction_base: ExtractionParams,
                   cluster: ClusterParams, assign_params: AssignmentParams,
                   providers: Providers, annotate_fn):
    """F1 as a function of the keyword count at a fixed threshold.

    ``annotate_fn(space, corpus) -> {doc_id: label or None}`` supplies gold
    labels for each regenerated space (label names change with the space).
    Returns (c, f1) rows.
    """
    c_values = sorted(set(int(c) for c in c_range))
    if c_values and (c_values[0] < 1 or c_values[-1] > 12):
        raise ValueError("keyword counts must lie within [1, 12]")
    rows = []
    for c in c_values:
        extraction = replace(extraction_base, keyword_count=c,
                             candidate_pool=max(extraction_base.candidate_pool, 2 * c))
        space = generate_label_space(corpus, extraction, cluster, providers)
        keyword_sets, _ = corpus_keyword_vectors(corpus, extraction, providers)
        matrices = document_matrices(keyword_sets, space, providers, extraction.enrich)
        predictions = assign_corpus(matrices, space, assign_params)
        gold = annotate_fn(space, corpus)
        report = evaluate(predictions, gold, threshold_percent=assign_params.threshold_percent)
        rows.append((c, report.f1))
    return rows


def ablate_metadata(corpus: Corpus, extraction_base: ExtractionParams,
                    cluster: ClusterParams, t_set, providers: Providers,
                    annotate_fn, dedupe: bool = True):
    """Paired F1 rows with and without keyword enrichment, identical seeds.

    Returns (T, f1_with, f1_without) rows.
    """
    f1_by_variant = {}
    for enrich in (True, False):
        extraction = replace(extraction_base, enrich=enrich)
        space = generate_label_space(corpus, extraction, cluster, providers)
        keyword_sets, _ = corpus_keyword_vectors(corpus, extraction, providers)
        by_t = predictions_per_threshold(keyword_sets, space, providers, t_set,
                                         include_metadata=enrich, dedupe=dedupe)
        gold = annotate_fn(space, corpus)
        f1_by_variant[enrich] = {
            t: evaluate(by_t[t], gold, threshold_percent=t).f1 for t in by_t
        }
    return [(t, f1_by_variant[True][t], f1_by_variant[False][t]) for t in sorted(t_set)]
