"""Score algebra: combined guidance score, recall reward, normalization, and
the pairwise reward-model loss used for verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyReferencesError,
    OutOfRangeError,
)

# Resolves canonical object labels to unit-norm embedding vectors.
EmbedProvider = Callable[[Sequence[str]], list[np.ndarray]]


@dataclass(frozen=True)
class ObjectMention:
    """An object word as written plus its lemma/synonym-folded label."""

    surface: str
    canonical: str


@dataclass(frozen=True)
class PreferencePair:
    """Scalar rewards of a chosen and a rejected response."""

    r_plus: float
    r_minus: float


@dataclass(frozen=True)
class RewardScore:
    r_hal: float
    r_rec: float
    combined: float


def combine_scores(r_hal: float, r_rec: float, w: float) -> float:
    """Linear reward combination: w * r_hal + (1 - w) * r_rec."""
    if not 0.0 <= r_hal <= 1.0:
        raise OutOfRangeError("r_hal", f"{r_hal} not in [0, 1]")
    if not 0.0 <= r_rec <= 1.0:
        raise OutOfRangeError("r_rec", f"{r_rec} not in [0, 1]")
    if not 0.0 <= w <= 1.0:
        raise OutOfRangeError("w", f"{w} not in [0, 1]")
    return w * r_hal + (1.0 - w) * r_rec


def max_similarity(pred: np.ndarray, refs: Sequence[np.ndarray]) -> float:
    """Maximum dot product of a predicted-object vector with any reference."""
    if len(refs) == 0:
        raise EmptyReferencesError("no reference vectors")
    pred = np.asarray(pred, dtype=float)
    best = -np.inf
    for ref in refs:
        ref = np.asarray(ref, dtype=float)
        if ref.shape != pred.shape:
            raise DimensionMismatchError(f"{ref.shape} vs {pred.shape}")
        best = max(best, float(pred @ ref))
    return best


def dedupe_by_canonical(mentions: Sequence[ObjectMention]) -> list[ObjectMention]:
    seen: dict[str, ObjectMention] = {}
    for m in mentions:
        seen.setdefault(m.canonical, m)
    return list(seen.values())


def recall_reward(
    ref_objects: Sequence[ObjectMention],
    pred_objects: Sequence[ObjectMention],
    embed: EmbedProvider,
    tau: float,
) -> float:
    """Estimated object recall of a caption against reference objects.

    A deduplicated predicted object is a true positive iff its maximum
    embedding similarity to any reference strictly exceeds tau. The ratio of
    true positives to reference count is clamped to [0, 1]; an empty reference
    set is vacuously satisfied.
    """
    n = len(ref_objects)
    if n == 0:
        return 1.0
    preds = dedupe_by_canonical(pred_objects)
    if not preds:
        return 0.0
    ref_vecs = embed([m.canonical for m in ref_objects])
    pred_vecs = embed([m.canonical for m in preds])
    true_positives = sum(
        1 for v in pred_vecs if max_similarity(v, ref_vecs) > tau
    )
    return min(true_positives / n, 1.0)


def minmax_normalize(scores: Sequence[float], epsilon: float = 1e-12) -> list[float]:
    """Rescale candidate scores to [0, 1) via (s - min) / (max - min + eps)."""
    if len(scores) == 0:
        raise OutOfRangeError("scores", "empty candidate set")
    lo = min(scores)
    hi = max(scores)
    return [(s - lo) / (hi - lo + epsilon) for s in scores]


def bradley_terry_loss(delta: float) -> float:
    """-log sigmoid(delta), the pairwise preference-classification term."""
    # logaddexp keeps this finite for large |delta|
    return float(np.logaddexp(0.0, -delta))


def rm_pairwise_loss(pair: PreferencePair) -> float:
    """Preference loss plus squared anchors pulling rewards toward 1 and 0."""
    bt = bradley_terry_loss(pair.r_plus - pair.r_minus)
    return bt + (pair.r_plus - 1.0) ** 2 + pair.r_minus**2
