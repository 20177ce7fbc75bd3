"""Iterative sample-score-select guided decoding, plus single-round best-of-k."""

from __future__ import annotations

import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .backends.protocol import (
    BackendSet,
    DetectRequest,
    EmbedRequest,
    GeneratedCandidate,
    GenerateRequest,
    ScoreRequest,
    StopCondition,
)
from .core import (
    Candidate,
    EpisodeTrace,
    GenerationParams,
    GuidanceConfig,
    HalNormalization,
    HalScope,
    IterationRecord,
    SeedStream,
    VisualContext,
    is_infinite,
    validate_generation_params,
    validate_guidance_config,
)
from .errors import EmptyCandidatesError, OutOfRangeError, SchemaError
from .extraction import Lexicon, extract_object_mentions
from .rewards import ObjectMention, combine_scores, minmax_normalize, recall_reward
from .segmenter import truncate_after_boundaries

DEFAULT_CONFIDENCE_FLOOR = 0.1

_WORD_RE = re.compile(r"\S+")


class Termination(Enum):
    EOS = "eos"
    MAX_TOKENS = "max_tokens"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class DecodeResult:
    final_text: str
    trace: EpisodeTrace
    termination: Termination


def select_best(scores: Sequence[float]) -> int:
    """Smallest index attaining the maximum score."""
    if len(scores) == 0:
        raise EmptyCandidatesError("no candidate scores")
    return max(range(len(scores)), key=lambda i: scores[i])


class _CountingBackends:
    """Counts every backend request; safe under concurrent scoring."""

    def __init__(self, backends: BackendSet):
        self._backends = backends
        self._lock = threading.Lock()
        self.calls = 0

    def _tick(self):
        with self._lock:
            self.calls += 1

    def generate(self, req):
        self._tick()
        return self._backends.generate.generate(req)

    def score(self, req):
        self._tick()
        value = self._backends.score.score(req)
        if not 0.0 <= value <= 1.0:
            raise SchemaError(f"score {value} outside [0, 1]")
        return value

    def detect(self, req):
        self._tick()
        return self._backends.detect.detect(req)

    def embed(self, labels):
        self._tick()
        return self._backends.embed.embed(EmbedRequest(tuple(labels)))


def _truncate_words(text: str, limit: int) -> str:
    """Cut after the limit-th whitespace token, preserving spacing before it."""
    for i, match in enumerate(_WORD_RE.finditer(text), start=1):
        if i == limit:
            return text[: match.end()]
    return text


def _postprocess(
    cand: GeneratedCandidate, T, remaining_tokens: int
) -> Candidate:
    """Enforce the sentence-period and token-cap stop conditions client-side."""
    text, finished, tokens = cand.text, cand.finished, cand.token_count
    if not is_infinite(T):
        split = truncate_after_boundaries(text, T)
        if split.remainder:
            text = split.chunk
            finished = False
            tokens = len(text.split())
    if tokens > remaining_tokens:
        text = _truncate_words(text, remaining_tokens)
        finished = False
        tokens = remaining_tokens
    return Candidate(text=text, finished=finished, token_count=tokens)


def _reference_mentions(
    counting: _CountingBackends, image_ref: str, confidence_floor: float
) -> list[ObjectMention]:
    detections = counting.detect(DetectRequest(image_ref))
    return [
        ObjectMention(surface=d.label, canonical=d.label.lower())
        for d in detections
        if d.confidence >= confidence_floor
    ]


def _score_round(
    counting: _CountingBackends,
    ctx: VisualContext,
    guidance: GuidanceConfig,
    prefix: str,
    candidates: Sequence[Candidate],
    ref_mentions: Sequence[ObjectMention],
    lexicon: Lexicon,
    parallel: bool,
) -> tuple[list[float], list[float], list[float]]:
    """Score each prefix-plus-candidate; returns (r_hal, r_rec, combined)."""

    def score_one(cand: Candidate) -> tuple[float, float]:
        full_text = prefix + cand.text
        hal_text = full_text if guidance.hal_scope == HalScope.FULL_PREFIX else cand.text
        r_hal = counting.score(ScoreRequest(ctx.image_ref, ctx.instruction, hal_text))
        preds = extract_object_mentions(full_text, lexicon)
        r_rec = recall_reward(ref_mentions, preds, counting.embed, guidance.tau)
        return r_hal, r_rec

    if parallel and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=min(len(candidates), 16)) as pool:
            pairs = list(pool.map(score_one, candidates))
    else:
        pairs = [score_one(c) for c in candidates]

    r_hal_raw = [p[0] for p in pairs]
    r_rec = [p[1] for p in pairs]
    if guidance.hal_normalization == HalNormalization.MINMAX:
        r_hal = minmax_normalize(r_hal_raw)
    else:
        r_hal = r_hal_raw
    combined = [combine_scores(h, r, guidance.w) for h, r in zip(r_hal, r_rec)]
    return r_hal, r_rec, combined


def _request_candidates(
    counting: _CountingBackends,
    ctx: VisualContext,
    params: GenerationParams,
    prefix: str,
    iteration: int,
    remaining_tokens: int,
    stream: SeedStream,
) -> list[Candidate]:
    stop = StopCondition(None if is_infinite(params.T) else params.T)
    candidates: list[Candidate] = []
    for retry in (0, 1):  # retry once with a fresh seed split on a degenerate round
        req = GenerateRequest(
            image_ref=ctx.image_ref,
            instruction=ctx.instruction,
            prefix=prefix,
            num_samples=params.k,
            temperature=params.temperature,
            stop=stop,
            max_tokens=remaining_tokens,
            seed=stream.split(iteration, retry).request_seed(),
        )
        resp = counting.generate(req)
        if len(resp.candidates) == 0:
            raise EmptyCandidatesError(f"no candidates at iteration {iteration}")
        candidates = [
            _postprocess(c, params.T, remaining_tokens) for c in resp.candidates
        ]
        if any(c.text or c.finished for c in candidates):
            return candidates
    raise EmptyCandidatesError(f"degenerate candidates at iteration {iteration}")


def decode_episode(
    ctx: VisualContext,
    params: GenerationParams,
    guidance: GuidanceConfig,
    backends: BackendSet,
    seed: int,
    *,
    lexicon: Lexicon | None = None,
    parallel_scoring: bool = False,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> DecodeResult:
    """Run the guided-decoding loop: sample k candidates every T sentences,
    score each extended prefix with the combined reward, keep the argmax."""
    validate_generation_params(params)
    validate_guidance_config(guidance)
    counting = _CountingBackends(backends)
    stream = SeedStream(seed)

    ref_mentions = _reference_mentions(counting, ctx.image_ref, confidence_floor)
    if lexicon is None:
        lexicon = Lexicon.identity([m.canonical for m in ref_mentions])

    prefix = ""
    tokens_selected = 0
    total_tokens = 0
    iterations: list[IterationRecord] = []
    termination = Termination.MAX_ITERATIONS

    for it in range(params.max_iterations):
        remaining = params.max_total_tokens - tokens_selected
        candidates = _request_candidates(
            counting, ctx, params, prefix, it, remaining, stream
        )
        total_tokens += sum(c.token_count for c in candidates)
        r_hal, r_rec, combined = _score_round(
            counting, ctx, guidance, prefix, candidates,
            ref_mentions, lexicon, parallel_scoring,
        )
        sel = select_best(combined)
        iterations.append(
            IterationRecord(
                candidates=tuple(candidates),
                r_hal=tuple(r_hal),
                r_rec=tuple(r_rec),
                combined=tuple(combined),
                selected_index=sel,
            )
        )
        selected = candidates[sel]
        prefix += selected.text
        tokens_selected += selected.token_count
        if selected.finished:
            termination = Termination.EOS
            break
        if tokens_selected >= params.max_total_tokens:
            termination = Termination.MAX_TOKENS
            break

    trace = EpisodeTrace(
        seed=seed,
        iterations=tuple(iterations),
        total_generated_tokens=total_tokens,
        total_backend_calls=counting.calls,
    )
    return DecodeResult(final_text=prefix, trace=trace, termination=termination)


def best_of_k(
    ctx: VisualContext,
    params: GenerationParams,
    guidance: GuidanceConfig,
    backends: BackendSet,
    seed: int,
    *,
    lexicon: Lexicon | None = None,
    parallel_scoring: bool = False,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> DecodeResult:
    """One round of k complete responses, one scoring pass, one selection."""
    validate_generation_params(params)
    validate_guidance_config(guidance)
    if not is_infinite(params.T):
        raise OutOfRangeError("T", "best_of_k requires T=INFINITY")
    counting = _CountingBackends(backends)
    stream = SeedStream(seed)

    ref_mentions = _reference_mentions(counting, ctx.image_ref, confidence_floor)
    if lexicon is None:
        lexicon = Lexicon.identity([m.canonical for m in ref_mentions])

    candidates = _request_candidates(
        counting, ctx, params, "", 0, params.max_total_tokens, stream
    )
    total_tokens = sum(c.token_count for c in candidates)
    r_hal, r_rec, combined = _score_round(
        counting, ctx, guidance, "", candidates,
        ref_mentions, lexicon, parallel_scoring,
    )
    sel = select_best(combined)
    record = IterationRecord(
        candidates=tuple(candidates),
        r_hal=tuple(r_hal),
        r_rec=tuple(r_rec),
        combined=tuple(combined),
        selected_index=sel,
    )
    selected = candidates[sel]
    if selected.finished:
        termination = Termination.EOS
    elif selected.token_count >= params.max_total_tokens:
        termination = Termination.MAX_TOKENS
    else:
        termination = Termination.MAX_ITERATIONS
    trace = EpisodeTrace(
        seed=seed,
        iterations=(record,),
        total_generated_tokens=total_tokens,
        total_backend_calls=counting.calls,
    )
    return DecodeResult(final_text=selected.text, trace=trace, termination=termination)


def trace_to_jsonl(trace: EpisodeTrace) -> str:
    """One JSON record per iteration, deterministic byte output."""
    lines = []
    for i, record in enumerate(trace.iterations):
        lines.append(
            json.dumps(
                {
                    "iteration": i,
                    "candidates": [c.text for c in record.candidates],
                    "r_hal": list(record.r_hal),
                    "r_rec": list(record.r_rec),
                    "combined": list(record.combined),
                    "selected_index": record.selected_index,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n" if lines else ""


def write_trace(trace: EpisodeTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_to_jsonl(trace))
