"""Walkthrough: the provider wire protocol, mock server and conformance suite.

The pipeline talks to embedding/metadata providers either in-process (the
deterministic mocks) or over HTTP. The bundled mock server exposes the same
mocks over the wire, so the HTTP path can be exercised with no model; a real
model sidecar implements the identical protocol.

Run from the repository root:

    python demos/06_http_providers.py
"""

import numpy as np

from labelkit.conformance import run_conformance
from labelkit.mockserver import start_in_thread
from labelkit.providers import (
    EmbeddingClient,
    HttpEmbedder,
    MetadataClient,
    HttpMetadataGenerator,
    MockEmbedder,
    ProviderConfig,
    make_providers,
)

server, base_url = start_in_thread()
print(f"mock provider server listening at {base_url}\n")

http_embed = EmbeddingClient(HttpEmbedder(base_url))
vectors = http_embed.embed(["hall thruster erosion", "fiber laser amplifier"])
print(f"/embed returned {vectors.shape[0]} vectors of dimension {vectors.shape[1]}")
print(f"norms: {np.linalg.norm(vectors, axis=1)}")

local = EmbeddingClient(MockEmbedder()).embed(["hall thruster erosion",
                                               "fiber laser amplifier"])
print(f"HTTP result identical to in-process mock: {np.array_equal(vectors, local)}\n")

http_meta = MetadataClient(HttpMetadataGenerator(base_url))
records = http_meta.generate_metadata(
    "The hall thruster erodes its channel walls under ion bombardment.",
    ["hall thruster", "channel walls"],
)
for rec in records:
    print(f"/metadata {rec.keyword!r} -> {rec.metadata_text!r}")

print("\nrunning the black-box conformance suite against the server:")
for check in run_conformance(base_url):
    print(f"  ok: {check}")

# Environment variables AI_EMBED_URL / AI_METADATA_URL reroute any pipeline
# run to this server without code changes:
import os

os.environ["AI_EMBED_URL"] = base_url
os.environ["AI_METADATA_URL"] = base_url
providers = make_providers(ProviderConfig())
print(f"\nmake_providers honored the env override: {providers.identity}")
del os.environ["AI_EMBED_URL"], os.environ["AI_METADATA_URL"]

server.shutdown()
print("server stopped.")
