"""HTTP clients for remote backend services."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from ..errors import ServiceReportedError, TransportError
from . import protocol
from .protocol import (
    DetectRequest,
    Detection,
    EmbedRequest,
    GenerateRequest,
    GenerateResponse,
    ScoreRequest,
)

DEFAULT_TIMEOUT_S = 120.0


def _post(base_url: str, path: str, payload: dict, timeout: float) -> dict:
    url = base_url.rstrip("/") + path
    try:
        resp = requests.post(url, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"{url}: {exc}") from exc
    if resp.status_code != 200:
        raise ServiceReportedError(f"{url}: HTTP {resp.status_code}: {resp.text[:500]}")
    try:
        return resp.json()
    except ValueError as exc:
        raise TransportError(f"{url}: non-JSON reply") from exc


@dataclass(frozen=True)
class HttpGenerateBackend:
    base_url: str
    timeout: float = DEFAULT_TIMEOUT_S

    def generate(self, req: GenerateRequest) -> GenerateResponse:
        payload = _post(self.base_url, protocol.GENERATE_PATH, req.to_payload(), self.timeout)
        return protocol.parse_generate_response(payload, req.num_samples)


@dataclass(frozen=True)
class HttpScoreBackend:
    base_url: str
    timeout: float = DEFAULT_TIMEOUT_S

    def score(self, req: ScoreRequest) -> float:
        payload = _post(self.base_url, protocol.SCORE_PATH, req.to_payload(), self.timeout)
        return protocol.parse_score_response(payload)


@dataclass(frozen=True)
class HttpDetectBackend:
    base_url: str
    timeout: float = DEFAULT_TIMEOUT_S

    def detect(self, req: DetectRequest) -> list[Detection]:
        payload = _post(self.base_url, protocol.DETECT_PATH, req.to_payload(), self.timeout)
        return protocol.parse_detect_response(payload)


@dataclass(frozen=True)
class HttpEmbedBackend:
    base_url: str
    timeout: float = DEFAULT_TIMEOUT_S

    def embed(self, req: EmbedRequest) -> list[np.ndarray]:
        payload = _post(self.base_url, protocol.EMBED_PATH, req.to_payload(), self.timeout)
        return protocol.parse_embed_response(payload, len(req.labels))
