"""FastAPI server implementing the provider wire protocol.

Endpoints:

    POST /embed     {"texts": [...]}                      -> {"embeddings": [[float x 768], ...], "model": ...}
    POST /metadata  {"abstract": ..., "keywords": [...]}  -> {"metadata": [{"keyword", "text"}, ...], "model": ...}
    GET  /health                                          -> {"status": "ok"}

Error contract: 400 for malformed bodies, 422 when the LLM output cannot be
parsed into one record per keyword, 502 when a model call fails. All error
bodies are {"error": reason}.

Configuration (env, overridable by CLI flags):

    SIDECAR_PORT         listen port            (default 8900)
    SIDECAR_EMBED_MODEL  model id or "hash"     (default sentence-transformers/all-mpnet-base-v2)
    SIDECAR_LLM          "template", "http:<url>" or a local model id
                                                (default "template")
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .embedders import EmbedderError, make_embedder
from .llm import IncompleteMetadata, LLMError, generate_metadata, make_llm

DEFAULT_EMBED_MODEL = "sentence-transformers/all-mpnet-base-v2"


@dataclass
class SidecarConfig:
    embed_model: str = DEFAULT_EMBED_MODEL
    llm: str = "template"
    port: int = 8900
    seed: int | None = None

    @classmethod
    def from_env(cls) -> "SidecarConfig":
        seed = os.environ.get("SIDECAR_SEED")
        return cls(
            embed_model=os.environ.get("SIDECAR_EMBED_MODEL", DEFAULT_EMBED_MODEL),
            llm=os.environ.get("SIDECAR_LLM", "template"),
            port=int(os.environ.get("SIDECAR_PORT", "8900")),
            seed=int(seed) if seed else None,
        )


class EmbedRequest(BaseModel):
    texts: list[str]


class MetadataRequest(BaseModel):
    abstract: str = Field(min_length=1)
    keywords: list[str] = Field(min_length=1)


def create_app(config: SidecarConfig | None = None, embedder=None, llm=None) -> FastAPI:
    """Build the service; refuses to start unless the embedder is 768-d.

    ``embedder`` and ``llm`` accept prebuilt backends (tests inject stubs).
    """
    config = config or SidecarConfig.from_env()
    embedder = embedder if embedder is not None else make_embedder(config.embed_model)
    llm = llm if llm is not None else make_llm(config.llm, seed=config.seed)

    app = FastAPI(title="labelkit-sidecar")

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:1])})

    @app.get("/health")
    def health():
        return {"status": "ok", "embed_model": embedder.name, "llm": llm.name}

    @app.post("/embed")
    def embed(body: EmbedRequest):
        if any(not t for t in body.texts):
            return JSONResponse(status_code=400, content={"error": "texts must be non-empty"})
        try:
            vectors = embedder.embed(body.texts) if body.texts else []
        except Exception as exc:
            return JSONResponse(status_code=502, content={"error": f"embedding failed: {exc}"})
        embeddings = vectors.tolist() if len(body.texts) else []
        return {"embeddings": embeddings, "model": embedder.name}

    @app.post("/metadata")
    def metadata(body: MetadataRequest):
        if any(not k for k in body.keywords):
            return JSONResponse(status_code=400, content={"error": "keywords must be non-empty"})
        try:
            found = generate_metadata(llm, body.abstract, body.keywords)
        except IncompleteMetadata as exc:
            return JSONResponse(
                status_code=422,
                content={"error": f"LLM output missing keywords: {exc.missing}"},
            )
        except LLMError as exc:
            return JSONResponse(status_code=502, content={"error": str(exc)})
        return {
            "metadata": [{"keyword": k, "text": found[k]} for k in body.keywords],
            "model": llm.name,
        }

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="labelkit-sidecar",
                                     description="Model-backed provider server")
    parser.add_argument("--port", type=int)
    parser.add_argument("--embed-model", help='model id or "hash"')
    parser.add_argument("--llm", help='"template", "http:<url>" or a model id')
    parser.add_argument("--seed", type=int)
    args = parser.parse_args(argv)

    config = SidecarConfig.from_env()
    if args.port is not None:
        config.port = args.port
    if args.embed_model:
        config.embed_model = args.embed_model
    if args.llm:
        config.llm = args.llm
    if args.seed is not None:
        config.seed = args.seed

    try:
        app = create_app(config)
    except (EmbedderError, LLMError) as exc:
        print(f"refusing to start: {exc}")
        return 1

    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
