"""FastAPI application implementing the embedding wire protocol.

POST /embed with ``{"texts": [...]}`` answers ``{"dim": d, "embeddings":
[...]}`` with one row per input, in order. Malformed requests get 400;
while the model is unavailable every embed request gets 503. GET /health
reports liveness.
"""
from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import load_backend
from .config import ServiceConfig


def create_app(config: ServiceConfig, defer_model: bool = False) -> FastAPI:
    app = FastAPI(title="embed-service")
    state = {"backend": None, "error": None}

    def ensure_backend():
        if state["backend"] is None and state["error"] is None:
            try:
                state["backend"] = load_backend(config.model)
            except Exception as exc:  # noqa: BLE001 - surface as 503 below
                state["error"] = f"{type(exc).__name__}: {exc}"
        return state["backend"]

    if not defer_model:
        ensure_backend()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            payload = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return JSONResponse({"error": "request body is not valid JSON"}, status_code=400)
        if not isinstance(payload, dict) or "texts" not in payload:
            return JSONResponse({"error": "missing 'texts' field"}, status_code=400)
        texts = payload["texts"]
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return JSONResponse({"error": "'texts' must be a list of strings"}, status_code=400)
        if not texts:
            return JSONResponse({"error": "'texts' must not be empty"}, status_code=400)
        if len(texts) > config.max_batch:
            return JSONResponse({"error": f"batch exceeds max size {config.max_batch}"},
                                status_code=400)
        backend = ensure_backend()
        if backend is None:
            return JSONResponse({"error": f"model not loaded: {state['error']}"},
                                status_code=503)
        rows = np.asarray(backend.encode(texts), dtype=np.float64)
        if not np.all(np.isfinite(rows)):
            return JSONResponse({"error": "backend produced non-finite values"},
                                status_code=500)
        return {"dim": backend.dim, "embeddings": rows.tolist()}

    return app
