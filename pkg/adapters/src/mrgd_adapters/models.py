"""Checkpoint-backed engines.

Heavy dependencies (torch, transformers, sentence-transformers, PIL)
load lazily on first request, so importing this module stays cheap and
the replay path never needs them. Every engine is a callable from a
wire request dict to a wire response dict, same as the replay engines.
"""

from __future__ import annotations

import math

from .config import AdapterConfig, AdapterError
from .schemas import PROTOCOL_VERSION


def logistic(x: float) -> float:
    """Squash a raw reward-head output into [0, 1]."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def l2_normalize(vector) -> list[float]:
    norm = math.sqrt(sum(float(x) * float(x) for x in vector))
    if norm == 0.0:
        raise AdapterError("cannot normalize a zero embedding vector")
    return [float(x) / norm for x in vector]


def truncate_sentences(text: str, boundaries: int) -> tuple[str, bool]:
    """Cut right after the Nth '.'; returns (text, hit_boundary)."""
    count = 0
    for i, ch in enumerate(text):
        if ch == ".":
            count += 1
            if count == boundaries:
                return text[: i + 1], True
    return text, False


def _word_count(text: str) -> int:
    return len(text.split())


def _load_image(image_ref: str):
    try:
        from PIL import Image
    except ImportError as exc:
        raise AdapterError("Pillow is required for image inputs") from exc
    try:
        return Image.open(image_ref).convert("RGB")
    except OSError as exc:
        raise AdapterError(f"cannot load image {image_ref!r}: {exc}") from exc


class GenerateEngine:
    """Vision-language captioning behind /v1/generate."""

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self._pipe = None

    def _pipeline(self):
        if self._pipe is None:
            try:
                import torch
                from transformers import pipeline
            except ImportError as exc:
                raise AdapterError("torch and transformers are required") from exc
            try:
                self._pipe = pipeline(
                    "image-text-to-text",
                    model=self.cfg.checkpoint,
                    device=self.cfg.device,
                    torch_dtype=torch.float32,
                )
            except Exception as exc:
                raise AdapterError(f"cannot load checkpoint {self.cfg.checkpoint!r}: {exc}") from exc
        return self._pipe

    def __call__(self, request: dict) -> dict:
        import torch

        pipe = self._pipeline()
        image = _load_image(request["image_ref"])
        prompt = request["instruction"]
        prefix = request["prefix"]
        candidates = []
        for sample in range(request["num_samples"]):
            torch.manual_seed(request["seed"] + sample)
            do_sample = request["temperature"] > 0
            try:
                out = pipe(
                    images=image,
                    text=prompt + "\n" + prefix,
                    max_new_tokens=request["max_tokens"],
                    do_sample=do_sample,
                    temperature=request["temperature"] if do_sample else None,
                    return_full_text=False,
                )
            except Exception as exc:
                raise AdapterError(f"generation failed: {exc}") from exc
            text = out[0]["generated_text"]
            finished = True
            if "sentence_boundaries" in request["stop"]:
                text, hit = truncate_sentences(
                    text, request["stop"]["sentence_boundaries"]
                )
                finished = not hit and finished
            candidates.append({
                "text": text,
                "finished": finished,
                "token_count": _word_count(text),
            })
        return {"version": PROTOCOL_VERSION, "candidates": candidates}


class ScoreEngine:
    """Reward-model scoring behind /v1/score.

    The raw scalar head is unbounded; the logistic map guarantees the
    protocol's [0, 1] range without clipping gradients of the ordering.
    """

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self._model = None
        self._tokenizer = None

    def _load(self):
        if self._model is None:
            try:
                from transformers import (
                    AutoModelForSequenceClassification,
                    AutoTokenizer,
                )
            except ImportError as exc:
                raise AdapterError("transformers is required") from exc
            try:
                self._tokenizer = AutoTokenizer.from_pretrained(self.cfg.checkpoint)
                self._model = AutoModelForSequenceClassification.from_pretrained(
                    self.cfg.checkpoint, num_labels=1
                ).to(self.cfg.device).eval()
            except Exception as exc:
                raise AdapterError(f"cannot load checkpoint {self.cfg.checkpoint!r}: {exc}") from exc
        return self._model, self._tokenizer

    def __call__(self, request: dict) -> dict:
        import torch

        model, tokenizer = self._load()
        inputs = tokenizer(
            request["instruction"],
            request["text"],
            return_tensors="pt",
            truncation=True,
        ).to(self.cfg.device)
        with torch.no_grad():
            raw = float(model(**inputs).logits.squeeze().item())
        return {"version": PROTOCOL_VERSION, "score": logistic(raw)}


class DetectEngine:
    """Open-vocabulary detection behind /v1/detect."""

    def __init__(self, cfg: AdapterConfig, vocabulary: list[str]):
        if not vocabulary:
            raise ValueError("detection vocabulary must be non-empty")
        self.cfg = cfg
        self.vocabulary = list(vocabulary)
        self._pipe = None

    def _pipeline(self):
        if self._pipe is None:
            try:
                from transformers import pipeline
            except ImportError as exc:
                raise AdapterError("transformers is required") from exc
            try:
                self._pipe = pipeline(
                    "zero-shot-object-detection",
                    model=self.cfg.checkpoint,
                    device=self.cfg.device,
                )
            except Exception as exc:
                raise AdapterError(f"cannot load checkpoint {self.cfg.checkpoint!r}: {exc}") from exc
        return self._pipe

    def __call__(self, request: dict) -> dict:
        pipe = self._pipeline()
        image = _load_image(request["image_ref"])
        try:
            raw = pipe(image, candidate_labels=self.vocabulary)
        except Exception as exc:
            raise AdapterError(f"detection failed: {exc}") from exc
        detections = [
            {"label": d["label"], "confidence": min(max(float(d["score"]), 0.0), 1.0)}
            for d in raw
        ]
        return {"version": PROTOCOL_VERSION, "detections": detections}


class EmbedEngine:
    """Sentence-embedding lookup behind /v1/embed."""

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self._model = None

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as exc:
                raise AdapterError("sentence-transformers is required") from exc
            try:
                self._model = SentenceTransformer(self.cfg.checkpoint, device=self.cfg.device)
            except Exception as exc:
                raise AdapterError(f"cannot load checkpoint {self.cfg.checkpoint!r}: {exc}") from exc
        return self._model

    def __call__(self, request: dict) -> dict:
        model = self._load()
        labels = request["labels"]
        vectors = []
        for start in range(0, len(labels), self.cfg.max_batch_size):
            batch = labels[start : start + self.cfg.max_batch_size]
            try:
                encoded = model.encode(batch, convert_to_numpy=True)
            except Exception as exc:
                raise AdapterError(f"embedding failed: {exc}") from exc
            vectors.extend(l2_normalize(vec) for vec in encoded)
        return {"version": PROTOCOL_VERSION, "vectors": vectors}
