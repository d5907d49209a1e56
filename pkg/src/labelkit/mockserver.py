"""HTTP server exposing the deterministic mock providers over the wire protocol.

Lets the HTTP client path be exercised without any model:

    POST /embed     {"texts": [...]}                      -> {"embeddings": ..., "model": ...}
    POST /metadata  {"abstract": ..., "keywords": [...]}  -> {"metadata": ..., "model": ...}
    GET  /health                                          -> {"status": "ok"}

Malformed bodies get a 400 with {"error": reason}.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .providers import MockEmbedder, MockMetadataGenerator


class _MockHandler(BaseHTTPRequestHandler):
    embedder = MockEmbedder()
    metadata = MockMetadataGenerator()

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return None

    def do_GET(self):
        if self.path == "/health":
            self._send(200, {"status": "ok"})
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        body = self._read_json()
        if body is None or not isinstance(body, dict):
            self._send(400, {"error": "body must be a JSON object"})
            return
        if self.path == "/embed":
            self._handle_embed(body)
        elif self.path == "/metadata":
            self._handle_metadata(body)
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def _handle_embed(self, body: dict) -> None:
        texts = body.get("texts")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            self._send(400, {"error": "texts must be a list of strings"})
            return
        if any(not t for t in texts):
            self._send(400, {"error": "texts must be non-empty"})
            return
        matrix = self.embedder.embed_batch(texts) if texts else []
        embeddings = matrix.tolist() if texts else []
        self._send(200, {"embeddings": embeddings, "model": self.embedder.identity})

    def _handle_metadata(self, body: dict) -> None:
        abstract = body.get("abstract")
        keywords = body.get("keywords")
        if not isinstance(abstract, str) or not abstract:
            self._send(400, {"error": "abstract must be a non-empty string"})
            return
        if (not isinstance(keywords, list) or not keywords
                or not all(isinstance(k, str) and k for k in keywords)):
            self._send(400, {"error": "keywords must be a non-empty list of strings"})
            return
        records = self.metadata.generate(abstract, keywords)
        self._send(200, {
            "metadata": [{"keyword": r.keyword, "text": r.metadata_text} for r in records],
            "model": self.metadata.identity,
        })


def create_server(port: int = 0, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bind the mock provider server; port 0 picks a free port."""
    return ThreadingHTTPServer((host, port), _MockHandler)


def start_in_thread(port: int = 0, host: str = "127.0.0.1"):
    """Start the server on a daemon thread; returns (server, base_url)."""
    server = create_server(port, host)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://{host}:{server.server_address[1]}"


def serve(port: int, host: str = "127.0.0.1") -> None:
    """Serve until interrupted."""
    server = create_server(port, host)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
