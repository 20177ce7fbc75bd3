"""File-backed fixture backends: deterministic, seed-independent lookups."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import (
    EmbeddingUnavailableError,
    ParseError,
    SchemaError,
    UnknownImageError,
    UnknownPrefixError,
)
from .protocol import (
    DetectRequest,
    Detection,
    EmbedRequest,
    GeneratedCandidate,
    GenerateRequest,
    GenerateResponse,
    ScoreRequest,
)


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, exc.msg) from exc
    if not isinstance(data, dict):
        raise ParseError(path, 1, "expected a JSON object at the top level")
    return data


def _token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class FixtureGenerateBackend:
    """Maps an exact prefix string to an ordered candidate list."""

    tree: Mapping[str, tuple[GeneratedCandidate, ...]]

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Sequence[dict]]) -> "FixtureGenerateBackend":
        tree = {}
        for prefix, candidates in raw.items():
            parsed = []
            for cand in candidates:
                text = cand["text"]
                parsed.append(
                    GeneratedCandidate(
                        text=text,
                        finished=bool(cand.get("finished", False)),
                        token_count=int(cand.get("token_count", _token_count(text))),
                    )
                )
            tree[prefix] = tuple(parsed)
        return cls(tree)

    @classmethod
    def from_file(cls, path) -> "FixtureGenerateBackend":
        data = _load_json(path)
        prefixes = data.get("prefixes", data)
        return cls.from_mapping(prefixes)

    def generate(self, req: GenerateRequest) -> GenerateResponse:
        if req.prefix not in self.tree:
            raise UnknownPrefixError(f"UNKNOWN_PREFIX({req.prefix!r})")
        return GenerateResponse(self.tree[req.prefix][: req.num_samples])


@dataclass(frozen=True)
class FixtureScoreBackend:
    """Maps exact response texts to scores, with an optional default."""

    table: Mapping[str, float]
    default: float | None = None

    @classmethod
    def from_file(cls, path) -> "FixtureScoreBackend":
        data = _load_json(path)
        default = data.pop("__default__", None)
        table = {text: float(score) for text, score in data.items()}
        return cls(table, default=None if default is None else float(default))

    def score(self, req: ScoreRequest) -> float:
        value = self.table.get(req.text, self.default)
        if value is None:
            raise SchemaError(f"no fixture score for text {req.text!r}")
        if not 0.0 <= value <= 1.0:
            raise SchemaError(f"fixture score {value} outside [0, 1]")
        return value


@dataclass(frozen=True)
class FixtureEmbedBackend:
    """Stored label -> unit-vector table (one-hot tables in tests)."""

    table: Mapping[str, np.ndarray]

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Sequence[float]]) -> "FixtureEmbedBackend":
        table = {}
        for label, values in raw.items():
            vec = np.asarray(values, dtype=float)
            norm = float(np.linalg.norm(vec))
            if abs(norm - 1.0) > 1e-6:
                raise SchemaError(f"embedding for {label!r} has norm {norm}, expected 1")
            table[label.lower()] = vec
        return cls(table)

    @classmethod
    def from_file(cls, path) -> "FixtureEmbedBackend":
        return cls.from_mapping(_load_json(path))

    @classmethod
    def one_hot(cls, labels: Sequence[str]) -> "FixtureEmbedBackend":
        dim = len(labels)
        table = {}
        for i, label in enumerate(labels):
            vec = np.zeros(dim)
            vec[i] = 1.0
            table[label.lower()] = vec
        return cls(table)

    def embed(self, req: EmbedRequest) -> list[np.ndarray]:
        out = []
        for label in req.labels:
            vec = self.table.get(label.lower())
            if vec is None:
                raise EmbeddingUnavailableError(label)
            out.append(vec)
        return out


@dataclass(frozen=True)
class FixtureDetectBackend:
    """Stored image_ref -> ground-truth object labels, confidence 1.0."""

    annotations: Mapping[str, tuple[str, ...]]

    @classmethod
    def from_file(cls, path) -> "FixtureDetectBackend":
        data = _load_json(path)
        images = data.get("images", data)
        return cls({ref: tuple(labels) for ref, labels in images.items()})

    def detect(self, req: DetectRequest) -> list[Detection]:
        if req.image_ref not in self.annotations:
            raise UnknownImageError(f"UNKNOWN_IMAGE({req.image_ref!r})")
        return [Detection(label, 1.0) for label in self.annotations[req.image_ref]]
