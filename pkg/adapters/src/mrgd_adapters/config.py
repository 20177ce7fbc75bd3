"""Adapter process configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .schemas import DETECT_PATH, EMBED_PATH, GENERATE_PATH, SCORE_PATH

CAPABILITY_PATHS = {
    "generate": GENERATE_PATH,
    "score": SCORE_PATH,
    "detect": DETECT_PATH,
    "embed": EMBED_PATH,
}


class AdapterError(Exception):
    """Runtime failure reported to clients as SERVICE_REPORTED."""


@dataclass(frozen=True)
class AdapterConfig:
    """One capability per server process."""

    capability: str
    checkpoint: str
    device: str = "cpu"
    max_batch_size: int = 8

    def __post_init__(self):
        if self.capability not in CAPABILITY_PATHS:
            raise ValueError(f"unknown capability {self.capability!r}")
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be positive")

    @property
    def endpoint_path(self) -> str:
        return CAPABILITY_PATHS[self.capability]
