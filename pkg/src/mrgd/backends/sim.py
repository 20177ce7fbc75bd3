"""Seeded synthetic-world backends.

The simulator produces one-sentence candidates of the form
"There is a {label}." where the label is a ground-truth object with
probability q (the truth rate) and a distractor otherwise. Its scoring
backend is an oracle for mention precision, which makes compute/grounding
trends measurable without any real models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..core import SeedStream
from ..errors import ParseError, UnknownImageError
from ..extraction import Lexicon, extract_object_mentions
from ..metrics import AnnotationRecord
from ..segmenter import count_boundaries
from .fixtures import FixtureEmbedBackend
from .protocol import (
    BackendSet,
    DetectRequest,
    Detection,
    EmbedRequest,
    GeneratedCandidate,
    GenerateRequest,
    GenerateResponse,
    ScoreRequest,
)

_NS_IMAGES = 0
_NS_BUDGETS = 1


@dataclass(frozen=True)
class SimWorld:
    """Per-episode ground truth, a distractor vocabulary, and a truth rate."""

    images: dict[str, tuple[str, ...]]
    distractors: tuple[str, ...]
    truth_rate: float
    sentences_per_caption: int | tuple[int, int]
    seed: int

    def __post_init__(self):
        distractor_set = set(self.distractors)
        for ref, objects in self.images.items():
            overlap = distractor_set & set(objects)
            if overlap:
                raise ParseError(
                    "<sim world>", 0,
                    f"image {ref!r} ground truth overlaps distractors: {sorted(overlap)}",
                )
        if not 0.0 <= self.truth_rate <= 1.0:
            raise ParseError("<sim world>", 0, f"truth_rate {self.truth_rate} not in [0, 1]")
        # mention extraction only sees alphabetic tokens, so the oracle
        # would silently miss any label containing digits or punctuation
        for label in list(distractor_set) + [o for objs in self.images.values() for o in objs]:
            if not label.isalpha():
                raise ParseError("<sim world>", 0, f"label {label!r} is not alphabetic")

    @classmethod
    def generate(
        cls,
        *,
        num_images: int,
        object_pool: list[str],
        objects_per_image: int,
        distractors: list[str],
        truth_rate: float,
        sentences_per_caption: int | tuple[int, int],
        seed: int,
    ) -> "SimWorld":
        """Assign each image a seeded draw of ground-truth objects."""
        pool = sorted(set(object_pool) - set(distractors))
        images = {}
        for i in range(num_images):
            rng = SeedStream(seed).split(_NS_IMAGES, i).generator()
            picked = rng.choice(pool, size=min(objects_per_image, len(pool)), replace=False)
            images[f"sim-{i:04d}"] = tuple(sorted(str(x) for x in picked))
        return cls(
            images=images,
            distractors=tuple(sorted(set(distractors))),
            truth_rate=truth_rate,
            sentences_per_caption=sentences_per_caption,
            seed=seed,
        )

    @classmethod
    def from_file(cls, path) -> "SimWorld":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(path, exc.lineno, exc.msg) from exc
        spc = cfg.get("sentences_per_caption", 5)
        if isinstance(spc, list):
            spc = (int(spc[0]), int(spc[1]))
        common = dict(
            distractors=cfg.get("distractors", []),
            truth_rate=float(cfg.get("truth_rate", 0.6)),
            sentences_per_caption=spc,
            seed=int(cfg.get("seed", 0)),
        )
        if "images" in cfg:
            return cls(
                images={ref: tuple(objs) for ref, objs in cfg["images"].items()},
                distractors=tuple(sorted(set(common.pop("distractors")))),
                **{k: v for k, v in common.items() if k != "distractors"},
            )
        return cls.generate(
            num_images=int(cfg["num_images"]),
            object_pool=cfg["object_pool"],
            objects_per_image=int(cfg.get("objects_per_image", 5)),
            **common,
        )

    @cached_property
    def vocabulary(self) -> tuple[str, ...]:
        labels: set[str] = set(self.distractors)
        for objects in self.images.values():
            labels.update(objects)
        return tuple(sorted(labels))

    def lexicon(self) -> Lexicon:
        return Lexicon.identity(self.vocabulary)

    def ground_truth(self, image_ref: str) -> tuple[str, ...]:
        try:
            return self.images[image_ref]
        except KeyError:
            raise UnknownImageError(f"UNKNOWN_IMAGE({image_ref!r})") from None

    def caption_budget(self, image_ref: str) -> int:
        """Total sentences in this episode's caption, fixed per image."""
        if isinstance(self.sentences_per_caption, int):
            return self.sentences_per_caption
        lo, hi = self.sentences_per_caption
        index = sorted(self.images).index(image_ref)
        rng = SeedStream(self.seed).split(_NS_BUDGETS, index).generator()
        return int(rng.integers(lo, hi + 1))

    def dataset(self, instruction: str = "Describe this image in detail."):
        from ..core import VisualContext

        return [
            (VisualContext(ref, instruction), AnnotationRecord(ref, frozenset(objs)))
            for ref, objs in sorted(self.images.items())
        ]


def sim_score_hal(world: SimWorld, image_ref: str, text: str) -> float:
    """Oracle precision: mentioned ground-truth labels over all mentions."""
    gt = set(world.ground_truth(image_ref))
    mentions = {m.canonical for m in extract_object_mentions(text, world.lexicon())}
    if not mentions:
        return 1.0
    return len(mentions & gt) / len(mentions)


@dataclass(frozen=True)
class SimGenerateBackend:
    world: SimWorld

    def generate(self, req: GenerateRequest) -> GenerateResponse:
        world = self.world
        gt = world.ground_truth(req.image_ref)
        budget = world.caption_budget(req.image_ref)
        remaining = max(budget - count_boundaries(req.prefix), 0)
        rng = SeedStream(req.seed).generator()
        candidates = []
        for _ in range(req.num_samples):
            if remaining == 0:
                candidates.append(GeneratedCandidate("", True, 0))
                continue
            if req.stop.to_eos:
                n_sentences = remaining
            else:
                n_sentences = min(req.stop.sentence_boundaries, remaining)
            sentences = []
            for _ in range(n_sentences):
                truthful = rng.random() < world.truth_rate
                pool = gt if truthful else world.distractors
                if not pool:
                    pool = world.distractors if truthful else gt
                label = pool[int(rng.integers(len(pool)))]
                sentences.append(f"There is a {label}.")
            text = " ".join(sentences)
            if req.prefix:
                text = " " + text
            candidates.append(
                GeneratedCandidate(text, n_sentences == remaining, len(text.split()))
            )
        return GenerateResponse(tuple(candidates))


@dataclass(frozen=True)
class SimScoreBackend:
    world: SimWorld

    def score(self, req: ScoreRequest) -> float:
        return sim_score_hal(self.world, req.image_ref, req.text)


@dataclass(frozen=True)
class SimDetectBackend:
    world: SimWorld

    def detect(self, req: DetectRequest) -> list[Detection]:
        return [Detection(label, 1.0) for label in self.world.ground_truth(req.image_ref)]


def sim_embed_backend(world: SimWorld) -> FixtureEmbedBackend:
    return FixtureEmbedBackend.one_hot(list(world.vocabulary))


def make_sim_backend_set(world: SimWorld) -> BackendSet:
    return BackendSet(
        generate=SimGenerateBackend(world),
        score=SimScoreBackend(world),
        detect=SimDetectBackend(world),
        embed=sim_embed_backend(world),
    )
