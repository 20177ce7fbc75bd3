"""Sentence-boundary counting and chunking.

The boundary is the literal '.' character, with no exceptions for
abbreviations or decimals; a smarter segmenter would change measured
behavior. Whitespace following a boundary belongs to the next chunk.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OutOfRangeError

DELIMITER = "."


@dataclass(frozen=True)
class ChunkSplit:
    chunk: str
    remainder: str
    boundaries_found: int


def count_boundaries(text: str) -> int:
    return text.count(DELIMITER)


def truncate_after_boundaries(text: str, T: int) -> ChunkSplit:
    """Split text right after its T-th delimiter.

    If fewer than T delimiters exist, the whole text is the chunk and the
    remainder is empty. chunk + remainder always reconstructs the input
    byte-exactly.
    """
    if T < 1:
        raise OutOfRangeError("T", f"{T} < 1")
    seen = 0
    for i, ch in enumerate(text):
        if ch == DELIMITER:
            seen += 1
            if seen == T:
                return ChunkSplit(text[: i + 1], text[i + 1 :], seen)
    return ChunkSplit(text, "", seen)
