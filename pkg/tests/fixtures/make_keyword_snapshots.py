"""Freeze keyword selections for the enrichment on/off regression test.

Run from the repository root:

    python tests/fixtures/make_keyword_snapshots.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from test_extraction import ION_FIXTURE, doc  # noqa: E402

from labelkit.extraction import ExtractionParams, extract_keywords  # noqa: E402
from labelkit.providers import ProviderConfig, make_providers  # noqa: E402


def main():
    providers = make_providers(ProviderConfig())
    frozen = {
        "enriched": extract_keywords(doc(ION_FIXTURE), ExtractionParams(enrich=True),
                                     providers).texts(),
        "plain": extract_keywords(doc(ION_FIXTURE), ExtractionParams(enrich=False),
                                  providers).texts(),
    }
    out = Path(__file__).parent / "keyword_snapshots.json"
    out.write_text(json.dumps(frozen, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
