"""Reward-guided caption decoding engine and evaluation harness."""

from .core import (
    INFINITY,
    Candidate,
    EpisodeTrace,
    GenerationParams,
    GuidanceConfig,
    HalNormalization,
    HalScope,
    IterationRecord,
    PartialResponse,
    SeedStream,
    VisualContext,
    validate_generation_params,
    validate_guidance_config,
)
from .decoder import DecodeResult, Termination, best_of_k, decode_episode, select_best
from .extraction import Lexicon, canonicalize, extract_object_mentions
from .metrics import AnnotationRecord, ComputeProxy, MetricsReport
from .rewards import (
    ObjectMention,
    PreferencePair,
    RewardScore,
    combine_scores,
    max_similarity,
    minmax_normalize,
    recall_reward,
    rm_pairwise_loss,
)
from .segmenter import ChunkSplit, count_boundaries, truncate_after_boundaries

__version__ = "0.1.0"
