import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _support import GOLDEN_DIR, GOLDEN_EXPECTED
from mrgd.extraction import Lexicon, extract_object_mentions
from mrgd.metrics import (
    AnnotationRecord,
    ComputeProxy,
    avg_word_length,
    build_report,
    chair_instance,
    chair_sentence,
    recall_metric,
)


def ann(ref, *labels):
    return AnnotationRecord(ref, frozenset(labels))


class TestChairInstance:
    def test_half_hallucinated(self):
        assert chair_instance([(["cat", "dog"], ann("i", "cat"))]) == 0.5

    def test_all_grounded(self):
        captions = [
            (["cat"], ann("a", "cat", "dog")),
            (["dog"], ann("b", "dog")),
        ]
        assert chair_instance(captions) == 0.0

    def test_zero_mentions(self):
        assert chair_instance([([], ann("a", "cat"))]) == 0.0

    def test_micro_average_pools_counts(self):
        # 1 hallucination over 3 total mentions, not a mean of per-caption rates
        captions = [
            (["cat", "dog"], ann("a", "cat")),
            (["mat"], ann("b", "mat")),
        ]
        assert chair_instance(captions) == pytest.approx(1 / 3)

    def test_repeat_mentions_counted_once(self):
        assert chair_instance([(["dog", "dog"], ann("a", "cat"))]) == 1.0


class TestChairSentence:
    def test_one_in_four(self):
        captions = [
            (["cat"], ann("a", "cat")),
            (["dog"], ann("b", "dog")),
            (["bus"], ann("c", "cat")),
            ([], ann("d")),
        ]
        assert chair_sentence(captions) == 0.25

    def test_all_clean(self):
        assert chair_sentence([(["cat"], ann("a", "cat"))]) == 0.0

    def test_all_hallucinate(self):
        captions = [(["bus"], ann("a", "cat")), (["dog"], ann("b", "cat"))]
        assert chair_sentence(captions) == 1.0

    def test_empty_corpus(self):
        assert chair_sentence([]) == 0.0


class TestRecallMetric:
    def test_one_third(self):
        assert recall_metric([(["cat"], ann("i", "cat", "dog", "car"))]) == pytest.approx(1 / 3)

    def test_superset_mentions(self):
        assert recall_metric([(["cat", "dog", "bus"], ann("i", "cat", "dog"))]) == 1.0

    def test_empty_ground_truth_corpus(self):
        assert recall_metric([(["cat"], ann("i"))]) == 1.0

    def test_micro_average(self):
        # 3 of 4 ground-truth objects covered corpus-wide
        captions = [
            (["cat"], ann("a", "cat")),
            (["dog"], ann("b", "dog", "car", "mat")),
        ]
        assert recall_metric(captions) == 0.5


class TestAvgLength:
    def test_word_counts(self):
        assert avg_word_length(["one two three", "one"]) == 2.0

    def test_empty_corpus(self):
        assert avg_word_length([]) == 0.0


def load_golden():
    lexicon = Lexicon.from_file(GOLDEN_DIR / "objects.lex")
    annotations = json.loads((GOLDEN_DIR / "annotations.json").read_text())
    captions = []
    texts = []
    for line in (GOLDEN_DIR / "captions.jsonl").read_text().splitlines():
        record = json.loads(line)
        ref, text = record["image_ref"], record["caption"]
        mentions = [m.canonical for m in extract_object_mentions(text, lexicon)]
        captions.append((mentions, AnnotationRecord(ref, frozenset(annotations[ref]))))
        texts.append(text)
    return captions, texts


class TestGoldenCorpus:
    def test_exact_values(self):
        captions, texts = load_golden()
        report = build_report(captions, texts)
        assert report.c_instance == GOLDEN_EXPECTED["c_instance"]
        assert report.c_sentence == GOLDEN_EXPECTED["c_sentence"]
        assert report.recall == GOLDEN_EXPECTED["recall"]
        assert report.avg_length == GOLDEN_EXPECTED["avg_length"]
        assert report.captions_evaluated == GOLDEN_EXPECTED["captions_evaluated"]

    def test_permutation_invariance(self):
        captions, texts = load_golden()
        report = build_report(captions, texts)
        shuffled = build_report(captions[::-1], texts[::-1])
        assert shuffled.c_instance == report.c_instance
        assert shuffled.c_sentence == report.c_sentence
        assert shuffled.recall == report.recall
        assert shuffled.avg_length == report.avg_length


LABELS = ["cat", "dog", "car", "bus", "mat"]
CAPTION = st.tuples(
    st.lists(st.sampled_from(LABELS), max_size=4),
    st.sets(st.sampled_from(LABELS), max_size=4),
)


@given(st.lists(CAPTION, max_size=10))
def test_streaming_equals_batch(raw):
    """Micro-averages pool corpus counts, so split accumulation agrees."""
    captions = [(mentions, AnnotationRecord("x", frozenset(gt))) for mentions, gt in raw]
    mentioned = hallucinated = gt_total = covered = bad = 0
    for mentions, annotation in captions:
        unique = list(dict.fromkeys(mentions))
        mentioned += len(unique)
        hallucinated += sum(
            1 for m in unique if m not in annotation.ground_truth_objects
        )
        gt_total += len(annotation.ground_truth_objects)
        covered += len(annotation.ground_truth_objects & set(mentions))
        bad += any(m not in annotation.ground_truth_objects for m in mentions)
    assert chair_instance(captions) == (hallucinated / mentioned if mentioned else 0.0)
    assert chair_sentence(captions) == (bad / len(captions) if captions else 0.0)
    assert recall_metric(captions) == (covered / gt_total if gt_total else 1.0)


@given(st.lists(CAPTION, min_size=1, max_size=10))
def test_instance_rate_is_one_minus_precision(raw):
    captions = [(mentions, AnnotationRecord("x", frozenset(gt))) for mentions, gt in raw]
    unique = [
        (m, a) for mentions, a in captions for m in dict.fromkeys(mentions)
    ]
    if not unique:
        return
    precision = sum(1 for m, a in unique if m in a.ground_truth_objects) / len(unique)
    assert chair_instance(captions) == pytest.approx(1.0 - precision)


def test_report_carries_compute_proxy():
    report = build_report([], [], ComputeProxy(10, 3))
    assert report.compute_proxy.total_generated_tokens == 10
    assert report.compute_proxy.total_backend_calls == 3
    assert report.captions_evaluated == 0
    assert report.recall == 1.0
