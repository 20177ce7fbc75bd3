"""Shared domain types, configuration validation, and seeded randomness."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .errors import OutOfRangeError, ParseError


class _InfinitySentencePeriod:
    """Distinguished value of T selecting single-round best-of-k decoding."""

    def __repr__(self):
        return "INFINITY"

    def __eq__(self, other):
        return isinstance(other, _InfinitySentencePeriod)

    def __hash__(self):
        return hash("INFINITY")


INFINITY = _InfinitySentencePeriod()

SentencePeriod = Union[int, _InfinitySentencePeriod]


def is_infinite(period: SentencePeriod) -> bool:
    return isinstance(period, _InfinitySentencePeriod)


class HalNormalization(Enum):
    NONE = "none"
    MINMAX = "minmax"


class HalScope(Enum):
    FULL_PREFIX = "full_prefix"
    LAST_CHUNK = "last_chunk"


@dataclass(frozen=True)
class VisualContext:
    """The multimodal prompt: an image reference plus a text instruction."""

    image_ref: str
    instruction: str


@dataclass(frozen=True)
class GenerationParams:
    k: int = 1
    T: SentencePeriod = 1
    temperature: float = 1.0
    max_total_tokens: int = 512
    max_iterations: int = 64


@dataclass(frozen=True)
class GuidanceConfig:
    w: float = 1.0
    tau: float = 0.5
    hal_normalization: HalNormalization = HalNormalization.NONE
    hal_scope: HalScope = HalScope.FULL_PREFIX


@dataclass(frozen=True)
class Candidate:
    text: str
    finished: bool
    token_count: int


@dataclass(frozen=True)
class PartialResponse:
    text: str = ""
    chunks_selected: int = 0
    finished: bool = False


@dataclass(frozen=True)
class IterationRecord:
    candidates: tuple[Candidate, ...]
    r_hal: tuple[float, ...]
    r_rec: tuple[float, ...]
    combined: tuple[float, ...]
    selected_index: int


@dataclass(frozen=True)
class EpisodeTrace:
    seed: int
    iterations: tuple[IterationRecord, ...]
    total_generated_tokens: int
    total_backend_calls: int


def validate_guidance_config(cfg: GuidanceConfig) -> GuidanceConfig:
    """Return cfg unchanged, or raise OUT_OF_RANGE naming the first bad field."""
    if not 0.0 <= cfg.w <= 1.0:
        raise OutOfRangeError("w", f"{cfg.w} not in [0, 1]")
    if not -1.0 <= cfg.tau <= 1.0:
        raise OutOfRangeError("tau", f"{cfg.tau} not in [-1, 1]")
    return cfg


def validate_generation_params(p: GenerationParams) -> GenerationParams:
    """Return p unchanged, or raise OUT_OF_RANGE naming the first bad field."""
    if not isinstance(p.k, int) or p.k < 1:
        raise OutOfRangeError("k", f"{p.k} < 1")
    if not is_infinite(p.T) and (not isinstance(p.T, int) or p.T < 1):
        raise OutOfRangeError("T", f"{p.T} is neither a positive integer nor INFINITY")
    if p.temperature < 0.0:
        raise OutOfRangeError("temperature", f"{p.temperature} < 0")
    if p.max_total_tokens < 1:
        raise OutOfRangeError("max_total_tokens", f"{p.max_total_tokens} < 1")
    if p.max_iterations < 1:
        raise OutOfRangeError("max_iterations", f"{p.max_iterations} < 1")
    return p


@dataclass(frozen=True)
class SeedStream:
    """Splittable counter-based randomness owned by the engine.

    A stream is identified by (root seed, split path). Children are derived by
    appending integer keys to the path, so the per-request seed handed to a
    backend depends only on the logical position of the request, never on
    execution order.
    """

    seed: int
    path: tuple[int, ...] = ()

    def split(self, *keys: int) -> "SeedStream":
        return SeedStream(self.seed, self.path + keys)

    def _sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=self.path)

    def request_seed(self) -> int:
        """A deterministic integer seed for one backend request."""
        return int(self._sequence().generate_state(1, np.uint64)[0])

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self._sequence()))


def parse_key_value_text(text: str, path: str = "<config>") -> dict[str, str]:
    """Parse a flat ``key = value`` document ('#' starts a comment)."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(path, line_no, f"expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ParseError(path, line_no, "empty key")
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_key_value_text(fh.read(), path=str(path))
