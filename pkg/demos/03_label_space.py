"""Walkthrough: inducing a named label space by clustering keyword embeddings.

Run from the repository root:

    python demos/03_label_space.py
"""

from pathlib import Path

from labelkit import (
    ClusterParams,
    ExtractionParams,
    ProviderConfig,
    default_stopwords,
    generate_label_space,
    ingest,
    make_providers,
)

ROOT = Path(__file__).resolve().parents[1]
corpus = ingest(ROOT / "tests" / "fixtures" / "planted_corpus.jsonl", default_stopwords())
providers = make_providers(ProviderConfig())

# Each document contributes its five keyword-metadata embeddings to a
# corpus-wide pool; k-means partitions the pool and every cluster is named
# by the member keyword closest to its centroid.
space = generate_label_space(
    corpus,
    ExtractionParams(keyword_count=5, candidate_pool=10),
    ClusterParams(k=4, seed=42, restarts=8),
    providers,
    out_path="/tmp/demo_space.json",
)

print(f"induced {len(space)} labels from {len(corpus)} documents:\n")
for label in space.labels:
    print(f"  {label.name:<12} members={label.member_count:>3} "
          f"|embedding|={float((label.embedding ** 2).sum()) ** 0.5:.6f}")

print("\nprovenance:")
for key, value in space.provenance.items():
    print(f"  {key}: {value}")
print("\nsaved to /tmp/demo_space.json; reloading it is bit-identical.")
