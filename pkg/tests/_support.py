"""Constants shared across the engine test modules."""

from pathlib import Path

GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

ONE_HOT_LABELS = [
    "cat", "dog", "car", "tree", "bus", "mat", "bird", "boat", "chair", "table",
    "horse", "sheep", "cow", "bottle", "plant", "couch", "bed", "clock", "book", "vase",
]

# hand-computed over tests/data/golden: 16 mentions with 4 hallucinated,
# 4 of 10 captions hallucinate, 12 of 15 ground-truth objects covered,
# 52 words over 10 captions
GOLDEN_EXPECTED = {
    "c_instance": 4 / 16,
    "c_sentence": 4 / 10,
    "recall": 12 / 15,
    "avg_length": 52 / 10,
    "captions_evaluated": 10,
}
