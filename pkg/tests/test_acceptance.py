"""End-to-end acceptance checks.

Each test prints exactly one PASS/FAIL line with its tolerance and
enforces a wall-clock budget, so the suite output doubles as a short
conformance report.
"""

import math
import time

import numpy as np

from _support import GOLDEN_DIR, GOLDEN_EXPECTED, ONE_HOT_LABELS
from mrgd.backends.fixtures import (
    FixtureDetectBackend,
    FixtureEmbedBackend,
    FixtureGenerateBackend,
    FixtureScoreBackend,
)
from mrgd.backends.protocol import BackendSet
from mrgd.backends.sim import SimWorld, make_sim_backend_set, sim_score_hal
from mrgd.cli import main
from mrgd.core import (
    INFINITY,
    GenerationParams,
    GuidanceConfig,
    VisualContext,
)
from mrgd.decoder import best_of_k, decode_episode, trace_to_jsonl
from mrgd.harness import run_episodes
from mrgd.rewards import (
    ObjectMention,
    PreferencePair,
    bradley_terry_loss,
    recall_reward,
    rm_pairwise_loss,
)
from test_metrics import load_golden
from test_rewards import brute_force_recall


def _verdict(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def test_loss_math():
    budget = 1.0
    start = time.time()
    expected = {
        (1.0, 0.0): 0.313261687518,
        (0.5, 0.5): math.log(2) + 0.5,
        (0.0, 1.0): 3.313261687518,
    }
    worst = max(
        abs(rm_pairwise_loss(PreferencePair(*pair)) - value)
        for pair, value in expected.items()
    )
    rng = np.random.default_rng(7)
    h = 1e-5
    grad_worst = 0.0
    monotone = True
    for delta in rng.uniform(-8, 8, size=100):
        grad = (bradley_terry_loss(delta + h) - bradley_terry_loss(delta - h)) / (2 * h)
        analytic = 1.0 / (1.0 + math.exp(-delta)) - 1.0
        monotone &= grad < 0.0
        grad_worst = max(grad_worst, abs(grad - analytic))
    elapsed = time.time() - start
    ok = worst <= 1e-9 and monotone and grad_worst <= 1e-6 and elapsed < budget
    _verdict(
        "pairwise loss analytic values and monotone preference term",
        ok,
        f"value err {worst:.2e} <= 1e-9, grad err {grad_worst:.2e} <= 1e-6, {elapsed:.2f}s",
    )


def test_recall_oracle_equivalence(one_hot_provider):
    budget = 5.0
    start = time.time()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(0, 9))
        m = int(rng.integers(0, 9))
        refs = [
            ObjectMention(str(x), str(x))
            for x in rng.choice(ONE_HOT_LABELS, size=n)
        ]
        preds = [
            ObjectMention(str(x), str(x))
            for x in rng.choice(ONE_HOT_LABELS, size=m)
        ]
        tau = float(rng.uniform(-1, 1))
        expected = brute_force_recall(refs, preds, one_hot_provider, tau)
        if recall_reward(refs, preds, one_hot_provider, tau) != expected:
            mismatches += 1
    elapsed = time.time() - start
    ok = mismatches == 0 and elapsed < budget
    _verdict(
        "recall reward equals brute-force similarity oracle",
        ok,
        f"{mismatches}/1000 mismatches, exact equality, {elapsed:.2f}s",
    )


def _random_fixture_backends(rng, k):
    captions = [f"Caption {chr(97 + i)} number {int(rng.integers(100))}." for i in range(k)]
    tree = {"": [{"text": text, "finished": True} for text in captions]}
    scores = {text: float(rng.uniform(0, 1)) for text in captions}
    return BackendSet(
        generate=FixtureGenerateBackend.from_mapping(tree),
        score=FixtureScoreBackend(scores),
        detect=FixtureDetectBackend({"img": ()}),
        embed=FixtureEmbedBackend.one_hot(["cat"]),
    )


def test_mode_equivalence():
    budget = 10.0
    start = time.time()
    rng = np.random.default_rng(31)
    ctx = VisualContext("img", "Describe this image in detail")
    mismatches = 0
    for trial in range(50):
        k = int(rng.integers(2, 7))
        backends = _random_fixture_backends(rng, k)
        params = GenerationParams(k=k, T=INFINITY)
        guidance = GuidanceConfig(w=1.0)
        seed = int(rng.integers(1 << 30))
        full = decode_episode(ctx, params, guidance, backends, seed=seed)
        short = best_of_k(ctx, params, guidance, backends, seed=seed)
        if full != short or trace_to_jsonl(full.trace) != trace_to_jsonl(short.trace):
            mismatches += 1
    elapsed = time.time() - start
    ok = mismatches == 0 and elapsed < budget
    _verdict(
        "infinite-period decoding is byte-identical to best-of-k",
        ok,
        f"{mismatches}/50 trees differ, byte-identical traces, {elapsed:.2f}s",
    )


TREND_WORLD = dict(
    num_images=200,
    object_pool=[
        "apple", "banana", "carrot", "donut", "egg", "fig", "grape", "honey",
        "icing", "jam", "kale", "lemon", "mango", "nut", "olive", "pear",
        "quince", "radish", "squash", "tomato",
    ],
    objects_per_image=4,
    distractors=[
        "blob", "crud", "dross", "fuzz", "gunk", "mist", "murk", "silt",
        "smog", "soot",
    ],
    truth_rate=0.6,
    sentences_per_caption=5,
    seed=17,
)


def _trend_world():
    return SimWorld.generate(**TREND_WORLD)


def _run_trend(world, params, w, seed=123):
    backends = make_sim_backend_set(world)
    return run_episodes(
        world.dataset("Describe this image in detail"), params,
        GuidanceConfig(w=w), backends, lexicon=world.lexicon(), seed=seed,
    )


def test_per_step_optimality_and_determinism():
    budget = 10.0
    start = time.time()
    world = SimWorld.generate(**{**TREND_WORLD, "num_images": 20})
    backends = make_sim_backend_set(world)
    dataset = world.dataset("Describe this image in detail")
    optimal = True
    runs = []
    for parallel in (False, False, True, True):
        outcomes = run_episodes(
            dataset, GenerationParams(k=5, T=1), GuidanceConfig(w=0.5),
            backends, lexicon=world.lexicon(), seed=55,
            parallel_scoring=parallel,
        )
        for o in outcomes:
            for rec in o.result.trace.iterations:
                optimal &= rec.combined[rec.selected_index] == max(rec.combined)
        runs.append("".join(trace_to_jsonl(o.result.trace) for o in outcomes))
    elapsed = time.time() - start
    deterministic = len(set(runs)) == 1
    ok = optimal and deterministic and elapsed < budget
    _verdict(
        "per-step optimal selection with byte-identical serial/parallel replays",
        ok,
        f"optimal={optimal}, deterministic={deterministic}, {elapsed:.2f}s",
    )


def test_sample_efficiency_trend():
    budget = 120.0
    start = time.time()
    world = _trend_world()
    rewards = {}
    for k in (1, 3, 5, 10):
        outcomes = _run_trend(world, GenerationParams(k=k, T=1), w=1.0)
        rewards[k] = np.array([
            sim_score_hal(world, o.ctx.image_ref, o.result.final_text)
            for o in outcomes
        ])
    gaps_ok = True
    detail = []
    for a, b in ((1, 3), (3, 5), (5, 10)):
        diff = rewards[b] - rewards[a]
        se = diff.std(ddof=1) / np.sqrt(len(diff))
        gaps_ok &= diff.mean() >= -se
        detail.append(f"k{a}->k{b}: {diff.mean():+.4f} (SE {se:.4f})")
    outcomes_inf = _run_trend(world, GenerationParams(k=5, T=INFINITY), w=1.0)
    reward_inf = np.array([
        sim_score_hal(world, o.ctx.image_ref, o.result.final_text)
        for o in outcomes_inf
    ])
    chunked_dominates = rewards[5].mean() >= reward_inf.mean()
    elapsed = time.time() - start
    ok = gaps_ok and chunked_dominates and elapsed < budget
    _verdict(
        "mean oracle reward non-decreasing in k and chunked beats one-shot",
        ok,
        "; ".join(detail)
        + f"; T=1 {rewards[5].mean():.4f} >= T=inf {reward_inf.mean():.4f}, {elapsed:.1f}s",
    )


def test_precision_recall_frontier():
    budget = 180.0
    start = time.time()
    world = _trend_world()
    hal_rates = []
    recalls = []
    for w in (0.0, 0.25, 0.5, 0.75, 1.0):
        outcomes = _run_trend(world, GenerationParams(k=10, T=1), w=w)
        hal_rates.append(np.array([
            1.0 - sim_score_hal(world, o.ctx.image_ref, o.result.final_text)
            for o in outcomes
        ]))
        recalls.append(np.array([
            len(o.annotation.ground_truth_objects & set(o.mentions))
            / len(o.annotation.ground_truth_objects)
            for o in outcomes
        ]))

    def monotone_within_se(series):
        for prev, curr in zip(series, series[1:]):
            diff = curr - prev
            se = diff.std(ddof=1) / np.sqrt(len(diff))
            if diff.mean() > se:
                return False
        return True

    hal_ok = monotone_within_se(hal_rates)
    rec_ok = monotone_within_se(recalls)
    elapsed = time.time() - start
    ok = hal_ok and rec_ok and elapsed < budget
    _verdict(
        "hallucination and recall both non-increasing in w",
        ok,
        f"hal {[f'{h.mean():.4f}' for h in hal_rates]}, "
        f"rec {[f'{r.mean():.4f}' for r in recalls]}, "
        f"within 1 SE per step, {elapsed:.1f}s",
    )


def test_metrics_golden_corpus():
    budget = 1.0
    start = time.time()
    from mrgd.metrics import build_report

    captions, texts = load_golden()
    report = build_report(captions, texts)
    failures = [
        name for name, expected in GOLDEN_EXPECTED.items()
        if getattr(report, name) != expected
    ]
    elapsed = time.time() - start
    ok = not failures and elapsed < budget
    _verdict(
        "10-caption golden corpus metrics match hand counts",
        ok,
        f"mismatched fields {failures or 'none'}, exact equality, {elapsed:.2f}s",
    )


def test_sweep_csv_determinism(tmp_path):
    budget = 60.0
    start = time.time()
    import json

    world_path = tmp_path / "world.json"
    world_path.write_text(json.dumps({**TREND_WORLD, "num_images": 10}))
    spec = f"sim:{world_path}"
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        args = ["sweep", "--w-values", "0,0.5,1", "--k-values", "1,5",
                "--T-values", "1,inf", "--seed", "9", "--out", str(out)]
        for cap in ("generate", "score", "detect", "embed"):
            args += [f"--backend-{cap}", spec]
        assert main(args) == 0
        outputs.append(out.read_bytes())
    elapsed = time.time() - start
    ok = outputs[0] == outputs[1] and elapsed < budget
    _verdict(
        "sweep command rerun emits byte-identical CSV",
        ok,
        f"{len(outputs[0])} bytes, identical={outputs[0] == outputs[1]}, {elapsed:.1f}s",
    )
