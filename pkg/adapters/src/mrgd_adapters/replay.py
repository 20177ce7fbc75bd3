"""Golden-transcript record and replay.

A transcript is a JSON-lines file of {"endpoint", "request", "response"}
records. Replay engines serve the recorded response for a matching
request; the recorder wraps a live engine and appends every exchange.
Matching canonicalizes the request JSON and may ignore volatile fields
(the generation seed by default), so a replayed engine can stand in for
a sampling service across runs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .config import AdapterError

IGNORED_FIELDS = {
    "/v1/generate": ("seed",),
    "/v1/score": (),
    "/v1/detect": (),
    "/v1/embed": (),
}


def _canonical(payload: dict, ignore: Iterable[str]) -> str:
    trimmed = {k: v for k, v in payload.items() if k not in set(ignore)}
    return json.dumps(trimmed, sort_keys=True, separators=(",", ":"))


def load_transcript(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                record["endpoint"], record["request"], record["response"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise AdapterError(
                    f"{path}:{line_no}: expected "
                    '{"endpoint", "request", "response"}'
                ) from None
            records.append(record)
    return records


class ReplayEngine:
    """Serves recorded responses for one endpoint."""

    def __init__(self, endpoint: str, records: list[dict], ignore_fields=None):
        self.endpoint = endpoint
        self.ignore_fields = tuple(
            IGNORED_FIELDS[endpoint] if ignore_fields is None else ignore_fields
        )
        self.table: dict[str, dict] = {}
        for record in records:
            if record["endpoint"] != endpoint:
                continue
            key = _canonical(record["request"], self.ignore_fields)
            self.table[key] = record["response"]

    @classmethod
    def from_file(cls, endpoint: str, path, ignore_fields=None) -> "ReplayEngine":
        return cls(endpoint, load_transcript(path), ignore_fields)

    def __call__(self, request: dict) -> dict:
        key = _canonical(request, self.ignore_fields)
        try:
            return self.table[key]
        except KeyError:
            raise AdapterError(
                f"no recorded response for {self.endpoint} request {key}"
            ) from None


class Recorder:
    """Wraps a live engine and appends each exchange to a transcript file."""

    def __init__(self, endpoint: str, engine, path):
        self.endpoint = endpoint
        self.engine = engine
        self.path = Path(path)

    def __call__(self, request: dict) -> dict:
        response = self.engine(request)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(
                {"endpoint": self.endpoint, "request": request, "response": response},
                sort_keys=True,
            ) + "\n")
        return response
