"""Wire protocol for the four backend capabilities.

One HTTP POST endpoint per capability (/v1/generate, /v1/score, /v1/detect,
/v1/embed), JSON payloads with lower_snake_case field names, and a mandatory
version field "mrgd/1" in every request. Replies are schema-validated at the
client before anything reaches the engine; out-of-range scores are rejected,
never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import jsonschema
import numpy as np

from ..errors import SchemaError

PROTOCOL_VERSION = "mrgd/1"

GENERATE_PATH = "/v1/generate"
SCORE_PATH = "/v1/score"
DETECT_PATH = "/v1/detect"
EMBED_PATH = "/v1/embed"


@dataclass(frozen=True)
class StopCondition:
    """Either stop after N sentence boundaries or run to EOS."""

    sentence_boundaries: int | None = None

    @property
    def to_eos(self) -> bool:
        return self.sentence_boundaries is None

    def to_payload(self) -> dict:
        if self.to_eos:
            return {"to_eos": True}
        return {"sentence_boundaries": self.sentence_boundaries}


@dataclass(frozen=True)
class GenerateRequest:
    image_ref: str
    instruction: str
    prefix: str
    num_samples: int
    temperature: float
    stop: StopCondition
    max_tokens: int
    seed: int

    def to_payload(self) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "image_ref": self.image_ref,
            "instruction": self.instruction,
            "prefix": self.prefix,
            "num_samples": self.num_samples,
            "temperature": self.temperature,
            "stop": self.stop.to_payload(),
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GeneratedCandidate:
    text: str
    finished: bool
    token_count: int


@dataclass(frozen=True)
class GenerateResponse:
    candidates: tuple[GeneratedCandidate, ...]

    def to_payload(self) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "candidates": [
                {"text": c.text, "finished": c.finished, "token_count": c.token_count}
                for c in self.candidates
            ],
        }


@dataclass(frozen=True)
class ScoreRequest:
    image_ref: str
    instruction: str
    text: str

    def to_payload(self) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "image_ref": self.image_ref,
            "instruction": self.instruction,
            "text": self.text,
        }


@dataclass(frozen=True)
class Detection:
    label: str
    confidence: float


@dataclass(frozen=True)
class DetectRequest:
    image_ref: str

    def to_payload(self) -> dict:
        return {"version": PROTOCOL_VERSION, "image_ref": self.image_ref}


@dataclass(frozen=True)
class EmbedRequest:
    labels: tuple[str, ...]

    def to_payload(self) -> dict:
        return {"version": PROTOCOL_VERSION, "labels": list(self.labels)}


_STOP_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"sentence_boundaries": {"type": "integer", "minimum": 1}},
            "required": ["sentence_boundaries"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"to_eos": {"const": True}},
            "required": ["to_eos"],
            "additionalProperties": False,
        },
    ]
}

GENERATE_REQUEST_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "image_ref": {"type": "string"},
        "instruction": {"type": "string"},
        "prefix": {"type": "string"},
        "num_samples": {"type": "integer", "minimum": 1},
        "temperature": {"type": "number", "minimum": 0},
        "stop": _STOP_SCHEMA,
        "max_tokens": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": [
        "version", "image_ref", "instruction", "prefix",
        "num_samples", "temperature", "stop", "max_tokens", "seed",
    ],
    "additionalProperties": False,
}

GENERATE_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string"},
                    "finished": {"type": "boolean"},
                    "token_count": {"type": "integer", "minimum": 0},
                },
                "required": ["text", "finished", "token_count"],
                "additionalProperties": False,
            },
        },
        "reason": {"type": "string"},
    },
    "required": ["version", "candidates"],
    "additionalProperties": False,
}

SCORE_REQUEST_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "image_ref": {"type": "string"},
        "instruction": {"type": "string"},
        "text": {"type": "string"},
    },
    "required": ["version", "image_ref", "instruction", "text"],
    "additionalProperties": False,
}

SCORE_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "score": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "required": ["version", "score"],
    "additionalProperties": False,
}

DETECT_REQUEST_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "image_ref": {"type": "string"},
    },
    "required": ["version", "image_ref"],
    "additionalProperties": False,
}

DETECT_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "detections": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "confidence": {"type": "number", "minimum": 0, "maximum": 1},
                },
                "required": ["label", "confidence"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["version", "detections"],
    "additionalProperties": False,
}

EMBED_REQUEST_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "labels": {"type": "array", "items": {"type": "string", "minLength": 1}},
    },
    "required": ["version", "labels"],
    "additionalProperties": False,
}

EMBED_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": PROTOCOL_VERSION},
        "vectors": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        },
    },
    "required": ["version", "vectors"],
    "additionalProperties": False,
}


def validate_payload(payload: dict, schema: dict, what: str) -> dict:
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"invalid {what} payload: {exc.message}") from exc
    return payload


def parse_generate_response(payload: dict, num_samples: int) -> GenerateResponse:
    validate_payload(payload, GENERATE_RESPONSE_SCHEMA, "generate response")
    candidates = tuple(
        GeneratedCandidate(c["text"], c["finished"], c["token_count"])
        for c in payload["candidates"]
    )
    if len(candidates) != num_samples and "reason" not in payload:
        raise SchemaError(
            f"expected {num_samples} candidates, got {len(candidates)} with no reason"
        )
    return GenerateResponse(candidates)


def parse_score_response(payload: dict) -> float:
    validate_payload(payload, SCORE_RESPONSE_SCHEMA, "score response")
    return float(payload["score"])


def parse_detect_response(payload: dict) -> list[Detection]:
    validate_payload(payload, DETECT_RESPONSE_SCHEMA, "detect response")
    return [Detection(d["label"], d["confidence"]) for d in payload["detections"]]


def parse_embed_response(payload: dict, num_labels: int) -> list[np.ndarray]:
    validate_payload(payload, EMBED_RESPONSE_SCHEMA, "embed response")
    vectors = [np.asarray(v, dtype=float) for v in payload["vectors"]]
    if len(vectors) != num_labels:
        raise SchemaError(f"expected {num_labels} vectors, got {len(vectors)}")
    for vec in vectors:
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-6:
            raise SchemaError(f"embedding vector has norm {norm}, expected 1")
    return vectors


class GenerateBackend(Protocol):
    def generate(self, req: GenerateRequest) -> GenerateResponse: ...


class ScoreBackend(Protocol):
    def score(self, req: ScoreRequest) -> float: ...


class DetectBackend(Protocol):
    def detect(self, req: DetectRequest) -> list[Detection]: ...


class EmbedBackend(Protocol):
    def embed(self, req: EmbedRequest) -> list[np.ndarray]: ...


@dataclass(frozen=True)
class BackendSet:
    """The four capabilities the engine talks to."""

    generate: GenerateBackend
    score: ScoreBackend
    detect: DetectBackend
    embed: EmbedBackend
