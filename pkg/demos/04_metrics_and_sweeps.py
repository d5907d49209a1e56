"""Walkthrough: the two figures of merit and the cluster-count sweep.

Redundancy is the worst pairwise cosine overlap inside the label space
(0 = orthogonal labels, 1 = duplicated labels). Coverage asks how well the
best-aligned label describes each document's keywords (bounded by 1).
They pull in opposite directions as the label count grows, which is exactly
what the sweep shows.

Run from the repository root:

    python demos/04_metrics_and_sweeps.py
"""

from pathlib import Path

from labelkit import (
    ClusterParams,
    ExtractionParams,
    ProviderConfig,
    coverage_of_corpus,
    default_stopwords,
    generate_label_space,
    ingest,
    make_providers,
    redundancy,
    sweep_k,
)
from labelkit.evaluation import write_csv
from labelkit.labelspace import corpus_keyword_vectors

ROOT = Path(__file__).resolve().parents[1]
corpus = ingest(ROOT / "tests" / "fixtures" / "planted_corpus.jsonl", default_stopwords())
providers = make_providers(ProviderConfig())
extraction = ExtractionParams()

space = generate_label_space(corpus, extraction, ClusterParams(k=4, seed=42), providers)
report = redundancy(space)
names = space.names()
pair = report.argmax_pair
print(f"redundancy R = {report.value:.4f}")
print(f"most-overlapping pair: {names[pair[0]]!r} vs {names[pair[1]]!r}")
print(f"mean off-diagonal cosine (diagnostic): {report.mean_offdiagonal:.4f}\n")

keyword_sets, _ = corpus_keyword_vectors(corpus, extraction, providers)
cov = coverage_of_corpus(keyword_sets, space, providers)
print(f"corpus coverage S = {cov.corpus_value:.4f}")
worst = min(cov.per_document, key=cov.per_document.get)
print(f"least-covered document: {worst} at {cov.per_document[worst]:.4f}\n")

print("sweeping the cluster count (same seed throughout):")
rows = sweep_k(corpus, extraction, ClusterParams(k=2, seed=42), range(2, 11), providers)
print(f"  {'k':>3} {'R':>8} {'S':>8}")
for k, r_value, s_value in rows:
    print(f"  {k:>3} {r_value:>8.4f} {s_value:>8.4f}")

write_csv("/tmp/demo_redundancy.csv", ["k", "R"], [(k, r) for k, r, _ in rows])
write_csv("/tmp/demo_coverage.csv", ["k", "S"], [(k, s) for k, _, s in rows])
print("\nfigure-shaped rows written to /tmp/demo_{redundancy,coverage}.csv")
