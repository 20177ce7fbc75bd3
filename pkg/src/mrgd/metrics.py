"""CHAIR-style corpus metrics: instance/sentence hallucination rates, recall.

All rates are micro-averages over corpus-level counts, so streaming and
batch accumulation agree exactly and caption order never matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class AnnotationRecord:
    image_ref: str
    ground_truth_objects: frozenset[str]


@dataclass(frozen=True)
class ComputeProxy:
    total_generated_tokens: int = 0
    total_backend_calls: int = 0


@dataclass(frozen=True)
class MetricsReport:
    c_instance: float
    c_sentence: float
    recall: float
    avg_length: float
    captions_evaluated: int
    compute_proxy: ComputeProxy


# One evaluated caption: its deduplicated canonical mentions plus annotation.
CaptionEval = tuple[Sequence[str], AnnotationRecord]


def _dedupe(mentions: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(mentions))


def chair_instance(captions: Iterable[CaptionEval]) -> float:
    """Fraction of mentioned objects (corpus-wide) that are hallucinated."""
    mentioned = 0
    hallucinated = 0
    for mentions, ann in captions:
        for label in _dedupe(mentions):
            mentioned += 1
            if label not in ann.ground_truth_objects:
                hallucinated += 1
    return hallucinated / mentioned if mentioned else 0.0


def chair_sentence(captions: Iterable[CaptionEval]) -> float:
    """Fraction of captions containing at least one hallucinated object."""
    total = 0
    bad = 0
    for mentions, ann in captions:
        total += 1
        if any(label not in ann.ground_truth_objects for label in mentions):
            bad += 1
    return bad / total if total else 0.0


def recall_metric(captions: Iterable[CaptionEval]) -> float:
    """Fraction of ground-truth objects (corpus-wide) that get mentioned."""
    gt_total = 0
    covered = 0
    for mentions, ann in captions:
        gt_total += len(ann.ground_truth_objects)
        covered += len(ann.ground_truth_objects & set(mentions))
    return covered / gt_total if gt_total else 1.0


def avg_word_length(caption_texts: Sequence[str]) -> float:
    """Mean whitespace-separated word count per caption."""
    if not caption_texts:
        return 0.0
    return sum(len(text.split()) for text in caption_texts) / len(caption_texts)


def build_report(
    captions: Sequence[CaptionEval],
    caption_texts: Sequence[str],
    compute_proxy: ComputeProxy = ComputeProxy(),
) -> MetricsReport:
    return MetricsReport(
        c_instance=chair_instance(captions),
        c_sentence=chair_sentence(captions),
        recall=recall_metric(captions),
        avg_length=avg_word_length(caption_texts),
        captions_evaluated=len(captions),
        compute_proxy=compute_proxy,
    )
