"""Benchmark runner and the (w, k, T) sweep harness."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .backends.protocol import BackendSet
from .core import (
    GenerationParams,
    GuidanceConfig,
    SeedStream,
    SentencePeriod,
    VisualContext,
    is_infinite,
)
from .decoder import DEFAULT_CONFIDENCE_FLOOR, DecodeResult, decode_episode
from .errors import BackendError, MrgdError
from .extraction import Lexicon, extract_object_mentions
from .metrics import AnnotationRecord, ComputeProxy, MetricsReport, build_report

Dataset = Sequence[tuple[VisualContext, AnnotationRecord]]


@dataclass(frozen=True)
class EpisodeOutcome:
    ctx: VisualContext
    annotation: AnnotationRecord
    result: DecodeResult
    mentions: tuple[str, ...]


@dataclass(frozen=True)
class SweepRow:
    w: float
    k: int
    T: SentencePeriod
    report: MetricsReport


def run_episodes(
    dataset: Dataset,
    params: GenerationParams,
    guidance: GuidanceConfig,
    backends: BackendSet,
    *,
    lexicon: Lexicon,
    seed: int,
    parallel_scoring: bool = False,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> list[EpisodeOutcome]:
    """Decode every dataset example with a per-episode seed split."""
    stream = SeedStream(seed)
    outcomes = []
    for i, (ctx, annotation) in enumerate(dataset):
        try:
            result = decode_episode(
                ctx, params, guidance, backends,
                seed=stream.split(i).request_seed(),
                lexicon=lexicon,
                parallel_scoring=parallel_scoring,
                confidence_floor=confidence_floor,
            )
        except MrgdError as exc:
            exc.args = (f"[image_ref={ctx.image_ref}] {exc}",)
            raise
        mentions = tuple(
            m.canonical for m in extract_object_mentions(result.final_text, lexicon)
        )
        outcomes.append(EpisodeOutcome(ctx, annotation, result, mentions))
    return outcomes


def summarize(outcomes: Sequence[EpisodeOutcome]) -> MetricsReport:
    captions = [(o.mentions, o.annotation) for o in outcomes]
    texts = [o.result.final_text for o in outcomes]
    proxy = ComputeProxy(
        total_generated_tokens=sum(o.result.trace.total_generated_tokens for o in outcomes),
        total_backend_calls=sum(o.result.trace.total_backend_calls for o in outcomes),
    )
    return build_report(captions, texts, proxy)


def run_benchmark(
    dataset: Dataset,
    params: GenerationParams,
    guidance: GuidanceConfig,
    backends: BackendSet,
    *,
    lexicon: Lexicon,
    seed: int,
    parallel_scoring: bool = False,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> MetricsReport:
    outcomes = run_episodes(
        dataset, params, guidance, backends,
        lexicon=lexicon, seed=seed,
        parallel_scoring=parallel_scoring,
        confidence_floor=confidence_floor,
    )
    return summarize(outcomes)


def run_sweep(
    dataset: Dataset,
    w_values: Sequence[float],
    k_values: Sequence[int],
    T_values: Sequence[SentencePeriod],
    params: GenerationParams,
    guidance: GuidanceConfig,
    backends: BackendSet,
    *,
    lexicon: Lexicon,
    seed: int,
    progress: Callable[[int, int], None] | None = None,
) -> list[SweepRow]:
    """One run_benchmark per (w, k, T) grid cell, same seed base per cell."""
    if not (w_values and k_values and T_values):
        raise BackendError("empty sweep grid")
    total = len(w_values) * len(k_values) * len(T_values)
    rows = []
    for w in w_values:
        for k in k_values:
            for T in T_values:
                cell_params = replace(params, k=k, T=T)
                cell_guidance = replace(guidance, w=w)
                report = run_benchmark(
                    dataset, cell_params, cell_guidance, backends,
                    lexicon=lexicon, seed=seed,
                )
                rows.append(SweepRow(w=w, k=k, T=T, report=report))
                if progress is not None:
                    progress(len(rows), total)
    return rows


CSV_HEADER = (
    "w,k,T,c_instance,c_sentence,recall,avg_length,"
    "total_generated_tokens,total_backend_calls"
)


def format_rows(rows: Sequence[SweepRow]) -> str:
    """Deterministic CSV text for a sweep (reals at 6 decimal places)."""
    lines = [CSV_HEADER]
    for row in rows:
        r = row.report
        t_field = "inf" if is_infinite(row.T) else str(row.T)
        lines.append(
            f"{row.w:.6f},{row.k},{t_field},"
            f"{r.c_instance:.6f},{r.c_sentence:.6f},{r.recall:.6f},{r.avg_length:.6f},"
            f"{r.compute_proxy.total_generated_tokens},{r.compute_proxy.total_backend_calls}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[SweepRow], path) -> None:
    if not rows:
        raise BackendError("no sweep rows to emit")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_rows(rows))
