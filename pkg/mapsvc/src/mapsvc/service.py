"""HTTP surface of the atom-mapping service.

POST /map   {"reactions": [...]} -> {"mapped": [...], "confidence": [...]}
GET  /health 503 while the engine is loading, then {"status", "model_version"}

Responses preserve request order; the service keeps no per-request state.
"""

from __future__ import annotations

import os
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .backends import Backend, build_default_backend
from .chem import ReactionSyntaxError, count_tokens, split_reaction

MAX_BATCH = 32
TOKEN_LIMIT = 512


class MapRequest(BaseModel):
    reactions: list[str]


class MapResponse(BaseModel):
    mapped: list[str]
    confidence: list[float]


def create_app(
    backend: Optional[Backend] = None,
    *,
    model_dir: Optional[str] = None,
    token_limit: int = TOKEN_LIMIT,
    max_batch: int = MAX_BATCH,
) -> FastAPI:
    """App factory; the engine loads during lifespan startup unless one is
    injected, so /health answers 503 until loading completes."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if app.state.backend is None:
            app.state.backend = build_default_backend(
                model_dir or os.environ.get("MAPSVC_MODEL_DIR")
            )
        yield

    app = FastAPI(title="mapsvc", version=__version__, lifespan=lifespan)
    app.state.backend = backend

    @app.get("/health")
    def health():
        engine = app.state.backend
        if engine is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return {"status": "ok", "model_version": f"{__version__}+{engine.name}"}

    @app.post("/map", response_model=MapResponse)
    def map_reactions(request: MapRequest):
        engine = app.state.backend
        if engine is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        if not request.reactions:
            raise HTTPException(status_code=400, detail="reactions list is empty")
        if len(request.reactions) > max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.reactions)} exceeds the {max_batch}-reaction cap",
            )
        mapped: list[str] = []
        confidence: list[float] = []
        for position, reaction in enumerate(request.reactions):
            try:
                split_reaction(reaction)  # syntax gate, including '>' count
                tokens = count_tokens(reaction)
            except ReactionSyntaxError as exc:
                raise HTTPException(
                    status_code=400, detail=f"reaction {position}: {exc}"
                ) from exc
            if tokens > token_limit:
                raise HTTPException(
                    status_code=413,
                    detail=f"reaction {position} needs {tokens} tokens, limit is {token_limit}",
                )
            try:
                hit = engine.map_reaction(reaction)
            except ReactionSyntaxError as exc:
                raise HTTPException(
                    status_code=400, detail=f"reaction {position}: {exc}"
                ) from exc
            if hit is None:
                raise HTTPException(
                    status_code=400, detail=f"reaction {position}: no engine could map it"
                )
            mapped.append(hit[0])
            confidence.append(hit[1])
        return MapResponse(mapped=mapped, confidence=confidence)

    return app


def main() -> None:
    import uvicorn

    port = int(os.environ.get("MAPSVC_PORT", "8765"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
