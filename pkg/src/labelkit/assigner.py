"""Label prediction: retain the top percentile of coverage entries per document."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

from .labelspace import LabelSpace
from .spacemetrics import CoverageMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssignmentParams:
    threshold_percent: float = 1.0
    dedupe: bool = True

    def __post_init__(self):
        if not 0.0 < self.threshold_percent <= 100.0:
            raise ValueError(
                f"threshold_percent must be in (0, 100], got {self.threshold_percent}"
            )


@dataclass
class Prediction:
    """Labels retained for one document, best supporting weight first."""

    doc_id: str
    labels: list  # (label name, best supporting weight, supporting keyword)
    retained_entries: int

    def names(self) -> list[str]:
        return [name for name, _, _ in self.labels]


def retained_count(c: int, k: int, threshold_percent: float) -> int:
    """How many coverage entries the top-T% filter keeps: max(1, floor(T% of c*k)).

    The floor matches the percentile reading of the worked scheme (10% of a
    5x15 matrix keeps 7 entries) and the lower bound guarantees every document
    receives at least one label (1% of 75 entries keeps 1, not 0).
    """
    if c < 1 or k < 1:
        raise ValueError("c and k must be >= 1")
    if not 0.0 < threshold_percent <= 100.0:
        raise ValueError(f"threshold_percent must be in (0, 100], got {threshold_percent}")
    return max(1, math.floor(threshold_percent / 100.0 * c * k))


def assign(matrix: CoverageMatrix, space: LabelSpace, params: AssignmentParams) -> Prediction:
    """Predict labels for one document from its coverage matrix.

    All k*c entries are sorted by descending weight (ties broken by ascending
    (label index, keyword index)); the top ``retained_count`` survive and map
    to their label names. With dedupe on, repeated labels keep only their best
    supporting entry.
    """
    k, c = matrix.entries.shape
    if k != len(space):
        raise ValueError(f"matrix has {k} label rows but space has {len(space)} labels")
    names = space.names()
    keywords = matrix.keyword_texts or [f"keyword_{j}" for j in range(c)]
    n_keep = retained_count(c, k, params.threshold_percent)

    cells = [(float(matrix.entries[i, j]), i, j) for i in range(k) for j in range(c)]
    cells.sort(key=lambda cell: (-cell[0], cell[1], cell[2]))
    retained = cells[:n_keep]

    if retained and retained[-1][0] < 0.0:
        logger.warning(
            "document %s: retained a negative coverage weight at T=%s%%",
            matrix.doc_id, params.threshold_percent,
        )

    labels = []
    seen = set()
    for weight, i, j in retained:
        if params.dedupe:
            if i in seen:
                continue
            seen.add(i)
        labels.append((names[i], weight, keywords[j]))
    return Prediction(doc_id=matrix.doc_id, labels=labels, retained_entries=n_keep)


def assign_corpus(matrices, space: LabelSpace, params: AssignmentParams) -> list[Prediction]:
    """One prediction per document, in input order."""
    return [assign(m, space, params) for m in matrices]


def save_predictions(predictions, path, provenance: dict | None = None) -> None:
    """Write predictions as JSONL; an optional provenance header line comes first."""
    with open(path, "w", encoding="utf-8") as fh:
        if provenance is not None:
            fh.write(json.dumps({"provenance": provenance}, ensure_ascii=False) + "\n")
        for pred in predictions:
            rec = {
                "id": pred.doc_id,
                "labels": [
                    {"name": name, "weight": weight, "keyword": kw}
                    for name, weight, kw in pred.labels
                ],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_predictions(path) -> list[Prediction]:
    predictions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "provenance" in rec and "id" not in rec:
                continue
            labels = [(e["name"], e["weight"], e["keyword"]) for e in rec["labels"]]
            predictions.append(
                Prediction(doc_id=rec["id"], labels=labels, retained_entries=len(labels))
            )
    return predictions
