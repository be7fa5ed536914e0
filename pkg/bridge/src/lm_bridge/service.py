"""FastAPI service implementing the fill-mask and classify-token protocols.

POST /fill-mask      {"tokens": [...], "mask_index": i, "top_k": k}
                  -> {"candidates": [{"token": ..., "score": ...}, ...]}
POST /classify-token {"token": "..."} -> {"p_abbr": p}
GET  /health         503 while the model loads, then 200 with its identifier

400 on malformed bodies, 422 on out-of-range mask_index; top_k above the
configured maximum is clamped and noted in the response.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backend import MaskedLMBackend


class FillMaskRequest(BaseModel):
    tokens: list[str]
    mask_index: int
    top_k: int = Field(default=5, ge=1)


class ClassifyRequest(BaseModel):
    token: str


def create_app(backend: MaskedLMBackend, top_k_max: int | None = None,
               load_on_startup: bool = True) -> FastAPI:
    limit = top_k_max if top_k_max is not None else backend.config.top_k_max

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if load_on_startup and not backend.ready:
            backend.load_in_background()
        yield

    app = FastAPI(title="lm-bridge", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "malformed request body"})

    def loading_response():
        return JSONResponse(status_code=503,
                            content={"error": "model is loading"})

    @app.get("/health")
    def health():
        if not backend.ready:
            return loading_response()
        return {"status": "ok", "model": backend.model_id}

    @app.post("/fill-mask")
    def fill_mask(request: FillMaskRequest):
        if not backend.ready:
            return loading_response()
        if not 0 <= request.mask_index < len(request.tokens):
            return JSONResponse(
                status_code=422,
                content={"error": f"mask_index {request.mask_index} outside "
                                  f"0..{len(request.tokens) - 1}"})
        top_k = min(request.top_k, limit)
        candidates = backend.fill_mask(request.tokens, request.mask_index, top_k)
        payload = {"candidates": candidates, "top_k_used": top_k}
        if top_k != request.top_k:
            payload["clamped"] = True
        return payload

    @app.post("/classify-token")
    def classify_token(request: ClassifyRequest):
        if not backend.ready:
            return loading_response()
        if not request.token.strip():
            return JSONResponse(status_code=400,
                                content={"error": "token must be non-empty"})
        return {"p_abbr": backend.classify(request.token)}

    return app
