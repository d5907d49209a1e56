"""Walkthrough: threshold-based label assignment and micro-averaged scoring.

A document's coverage matrix holds the alignment of each of its keywords
with each label. Keeping the top T percent of those entries (never fewer
than one) yields the predicted label set: small T is conservative, large T
trades precision for recall.

Run from the repository root:

    python demos/05_assign_and_evaluate.py
"""

from pathlib import Path

from labelkit import (
    AssignmentParams,
    ClusterParams,
    ExtractionParams,
    ProviderConfig,
    assign_corpus,
    default_stopwords,
    evaluate,
    generate_label_space,
    ingest,
    make_providers,
    retained_count,
)
from labelkit.labelspace import corpus_keyword_vectors
from labelkit.spacemetrics import document_matrices

print("entries kept for a 5-keyword x 15-label matrix:")
for t in (1, 5, 10, 15, 20):
    print(f"  T={t:>2}% -> {retained_count(5, 15, t)}")

ROOT = Path(__file__).resolve().parents[1]
corpus = ingest(ROOT / "tests" / "fixtures" / "planted_corpus.jsonl", default_stopwords())
providers = make_providers(ProviderConfig())
extraction = ExtractionParams()
space = generate_label_space(corpus, extraction, ClusterParams(k=4, seed=42), providers)
keyword_sets, _ = corpus_keyword_vectors(corpus, extraction, providers)
matrices = document_matrices(keyword_sets, space, providers)

doc = matrices[0]
print(f"\npredictions for {doc.doc_id} as T grows:")
for t in (1, 10, 25, 50):
    pred = assign_corpus([doc], space, AssignmentParams(threshold_percent=t))[0]
    labels = ", ".join(f"{n} ({w:.3f} via {kw!r})" for n, w, kw in pred.labels)
    print(f"  T={t:>2}%: {labels}")

# Synthetic gold: each document's planted topic names its correct label.
gold = {d.id: d.id.rsplit("-", 1)[0] for d in corpus}
by_name = {name.split()[0]: name for name in space.names()}
topic_label = {"propulsion": "thruster", "optics": "lidar",
               "materials": "composite", "robotics": "rover"}
gold = {doc_id: by_name.get(topic_label.get(topic, ""), None)
        for doc_id, topic in gold.items()}

print("\nmicro-averaged scores against the planted gold labels:")
print(f"  {'T':>3} {'P':>7} {'R':>7} {'F1':>7}")
for t in (1, 5, 10, 15, 20):
    preds = assign_corpus(matrices, space, AssignmentParams(threshold_percent=t))
    report = evaluate(preds, gold, threshold_percent=t)
    print(f"  {t:>3} {report.precision:>7.3f} {report.recall:>7.3f} {report.f1:>7.3f}")
