"""FastAPI application factories, one capability per app.

Each app owns a single POST route. Requests are validated against the
wire schemas before the engine runs, and engine output is re-validated
before it leaves the process, so a buggy engine can never emit an
out-of-contract reply.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .config import CAPABILITY_PATHS, AdapterError
from .schemas import (
    DetectRequest,
    DetectResponse,
    EmbedRequest,
    EmbedResponse,
    GenerateRequest,
    GenerateResponse,
    ScoreRequest,
    ScoreResponse,
)

_REQUEST_MODELS = {
    "generate": GenerateRequest,
    "score": ScoreRequest,
    "detect": DetectRequest,
    "embed": EmbedRequest,
}

_RESPONSE_MODELS = {
    "generate": GenerateResponse,
    "score": ScoreResponse,
    "detect": DetectResponse,
    "embed": EmbedResponse,
}


def _check_unit_norms(payload: dict) -> None:
    for vec in payload["vectors"]:
        norm = math.sqrt(sum(x * x for x in vec))
        if abs(norm - 1.0) > 1e-6:
            raise AdapterError(f"embedding vector has norm {norm}, expected 1")


def create_app(capability: str, engine) -> FastAPI:
    """Engine is a callable from a wire request dict to a response dict."""
    if capability not in CAPABILITY_PATHS:
        raise ValueError(f"unknown capability {capability!r}")
    request_model = _REQUEST_MODELS[capability]
    response_model = _RESPONSE_MODELS[capability]
    app = FastAPI(title=f"mrgd-adapter-{capability}")

    @app.post(CAPABILITY_PATHS[capability])
    async def handle(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"error": "request body is not JSON"}, status_code=400)
        try:
            validated = request_model.model_validate(payload)
        except ValidationError as exc:
            return JSONResponse(
                {"error": f"invalid request: {exc.errors()[0]['msg']}"},
                status_code=400,
            )
        try:
            raw = engine(validated.model_dump(mode="json"))
            reply = response_model.model_validate(raw)
            wire = (
                reply.model_dump_wire()
                if capability == "generate"
                else reply.model_dump()
            )
            if capability == "embed":
                _check_unit_norms(wire)
        except AdapterError as exc:
            return JSONResponse({"error": str(exc)}, status_code=500)
        except ValidationError as exc:
            return JSONResponse(
                {"error": f"engine produced an invalid reply: {exc.errors()[0]['msg']}"},
                status_code=500,
            )
        return JSONResponse(wire)

    return app
