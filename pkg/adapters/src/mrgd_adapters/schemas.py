"""Pydantic models for the mrgd/1 wire protocol.

These mirror the engine-side JSON schemas field for field. The adapters
deliberately do not import the engine package; this module is the single
source of protocol truth on the serving side.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field

PROTOCOL_VERSION = "mrgd/1"

GENERATE_PATH = "/v1/generate"
SCORE_PATH = "/v1/score"
DETECT_PATH = "/v1/detect"
EMBED_PATH = "/v1/embed"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class StopAtBoundaries(_Strict):
    sentence_boundaries: int = Field(ge=1)


class StopAtEos(_Strict):
    to_eos: Literal[True]


StopCondition = Union[StopAtBoundaries, StopAtEos]


class GenerateRequest(_Strict):
    version: Literal["mrgd/1"]
    image_ref: str
    instruction: str
    prefix: str
    num_samples: int = Field(ge=1)
    temperature: float = Field(ge=0)
    stop: StopCondition
    max_tokens: int = Field(ge=1)
    seed: int = Field(ge=0)


class GeneratedCandidate(_Strict):
    text: str
    finished: bool
    token_count: int = Field(ge=0)


class GenerateResponse(_Strict):
    version: Literal["mrgd/1"] = PROTOCOL_VERSION
    candidates: list[GeneratedCandidate]
    reason: str | None = None

    def model_dump_wire(self) -> dict:
        payload = self.model_dump()
        if payload.get("reason") is None:
            payload.pop("reason", None)
        return payload


class ScoreRequest(_Strict):
    version: Literal["mrgd/1"]
    image_ref: str
    instruction: str
    text: str


class ScoreResponse(_Strict):
    version: Literal["mrgd/1"] = PROTOCOL_VERSION
    score: float = Field(ge=0, le=1)


class DetectRequest(_Strict):
    version: Literal["mrgd/1"]
    image_ref: str


class Detection(_Strict):
    label: str = Field(min_length=1)
    confidence: float = Field(ge=0, le=1)


class DetectResponse(_Strict):
    version: Literal["mrgd/1"] = PROTOCOL_VERSION
    detections: list[Detection]


class EmbedRequest(_Strict):
    version: Literal["mrgd/1"]
    labels: list[str]

    def model_post_init(self, _ctx) -> None:
        for label in self.labels:
            if not label:
                raise ValueError("labels must be non-empty strings")


class EmbedResponse(_Strict):
    version: Literal["mrgd/1"] = PROTOCOL_VERSION
    vectors: list[list[float]]

    def model_post_init(self, _ctx) -> None:
        for vec in self.vectors:
            if not vec:
                raise ValueError("vectors must be non-empty")


REQUEST_MODELS = {
    "generate_request": GenerateRequest,
    "score_request": ScoreRequest,
    "detect_request": DetectRequest,
    "embed_request": EmbedRequest,
}

RESPONSE_MODELS = {
    "generate_response": GenerateResponse,
    "score_response": ScoreResponse,
    "detect_response": DetectResponse,
    "embed_response": EmbedResponse,
}
