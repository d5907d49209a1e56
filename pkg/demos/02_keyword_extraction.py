"""Walkthrough: statistical keyword ranking, enrichment and MMR selection.

Run from the repository root:

    python demos/02_keyword_extraction.py
"""

from labelkit import (
    ExtractionParams,
    ProviderConfig,
    extract_keywords,
    make_providers,
    rank_candidates,
)
from labelkit.corpus import Document

ABSTRACT = (
    "We propose a compact pulse tube cryocooler for infrared focal planes. "
    "The pulse tube cryocooler removes the moving displacer, and flexure "
    "bearings extend compressor life beyond twenty thousand hours. "
    "Thermodynamic modeling predicts eighteen milliwatts of lift at six "
    "kelvin. A vibration cancellation stage keeps exported jitter below "
    "focal plane requirements, and the cryocooler integrates with existing "
    "telescope cold heads."
)

# Stage 1: candidate phrases ranked by the five statistical features
# (frequency, position, casing, sentence spread, context diversity).
# Scores are normalized to (0, 1], higher is better.
print("top candidates:")
for text, score in rank_candidates(ABSTRACT, max_ngram=3, limit=10):
    print(f"  {1.0 / (1.0 + score):>7.4f}  {text}")

# Stage 2: the full per-document pipeline. The mock providers are
# deterministic, so this runs offline and reproducibly.
providers = make_providers(ProviderConfig())
doc = Document(id="demo", year=2026, title="", raw_text=ABSTRACT,
               clean_text=ABSTRACT.lower())
params = ExtractionParams(keyword_count=5, candidate_pool=10, mmr_lambda=0.7)
ks = extract_keywords(doc, params, providers)

print("\nselected keywords (MMR-diversified):")
for (text, score), record in zip(ks.keywords, ks.metadata):
    print(f"  {score:>6.4f}  {text}")
    print(f"          metadata: {record.metadata_text}")

plain = extract_keywords(doc, ExtractionParams(enrich=False), providers)
print("\nwithout enrichment:", plain.texts())
