"""Lexicon-driven extraction of object mentions from caption text.

The offline extractor is deterministic: a lexicon file maps surface forms
(including plural variants and synonyms) to canonical labels, and captions
are tokenized on non-alphabetic characters so only whole words can match.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ParseError
from .rewards import ObjectMention

NOT_AN_OBJECT = None

_TOKEN_RE = re.compile(r"[A-Za-z]+")


@dataclass(frozen=True)
class Lexicon:
    """Case-insensitive mapping from surface forms to canonical labels."""

    entries: Mapping[str, str]

    def __post_init__(self):
        normalized = {}
        for surface, canonical in self.entries.items():
            normalized[surface.lower()] = canonical.lower()
        for canonical in list(normalized.values()):
            normalized.setdefault(canonical, canonical)
        object.__setattr__(self, "entries", normalized)

    @property
    def canonical_set(self) -> frozenset[str]:
        return frozenset(self.entries.values())

    def lookup(self, word: str) -> str | None:
        """Canonical label for a word, or None if it is not an object.

        Exact surface matches win; otherwise common plural suffixes are
        stripped and retried.
        """
        w = word.lower()
        hit = self.entries.get(w)
        if hit is not None:
            return hit
        for suffix, replacement in (("ies", "y"), ("es", ""), ("s", "")):
            if w.endswith(suffix) and len(w) > len(suffix):
                hit = self.entries.get(w[: -len(suffix)] + replacement)
                if hit is not None:
                    return hit
        return None

    @classmethod
    def identity(cls, labels: Iterable[str]) -> "Lexicon":
        return cls({label: label for label in labels})

    @classmethod
    def from_file(cls, path) -> "Lexicon":
        """Parse `canonical: surface1, surface2, ...` records, one per line."""
        entries: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if ":" not in line:
                    raise ParseError(path, line_no, f"expected 'canonical: surfaces', got {raw.strip()!r}")
                canonical, surfaces = line.split(":", 1)
                canonical = canonical.strip().lower()
                if not canonical:
                    raise ParseError(path, line_no, "empty canonical label")
                entries[canonical] = canonical
                for surface in surfaces.split(","):
                    surface = surface.strip().lower()
                    if surface:
                        entries[surface] = canonical
        return cls(entries)


def canonicalize(word: str, lexicon: Lexicon) -> str | None:
    """Canonical label for a single word; None means NOT_AN_OBJECT."""
    return lexicon.lookup(word)


def extract_object_mentions(caption: str, lexicon: Lexicon) -> list[ObjectMention]:
    """Object mentions in first-occurrence order, deduplicated by canonical."""
    mentions: dict[str, ObjectMention] = {}
    for token in _TOKEN_RE.findall(caption):
        canonical = lexicon.lookup(token)
        if canonical is not None and canonical not in mentions:
            mentions[canonical] = ObjectMention(surface=token, canonical=canonical)
    return list(mentions.values())
