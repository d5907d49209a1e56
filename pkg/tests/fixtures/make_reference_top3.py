"""Freeze the oracle ranker's top-3 phrases for each bundled abstract.

Run from the repository root:

    python tests/fixtures/make_reference_top3.py

The committed reference_top3.json must match this script's output; the
fidelity test re-runs the oracle to guard against drift.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from oracles.reference_ranker import rank  # noqa: E402

from labelkit.extraction import default_extraction_stopwords  # noqa: E402


def main():
    fixtures = Path(__file__).parent / "abstracts"
    stopwords = default_extraction_stopwords()
    frozen = {}
    for path in sorted(fixtures.glob("*.txt")):
        text = path.read_text(encoding="utf-8")
        top = rank(text, stopwords, max_ngram=3, top=3)
        frozen[path.name] = [phrase for phrase, _ in top]
    out = Path(__file__).parent / "reference_top3.json"
    out.write_text(json.dumps(frozen, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(frozen)} fixtures -> {out}")


if __name__ == "__main__":
    main()
