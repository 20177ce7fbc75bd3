"""Command-line entry point.

Exit codes: 0 success, 1 configuration or input-file error, 2 backend or
runtime error. Flags override config-file values, which override defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import backends as backend_factory
from .backends.fixtures import FixtureDetectBackend
from .backends.protocol import DetectRequest, EmbedRequest, ScoreRequest
from .backends.sim import SimWorld
from .core import (
    INFINITY,
    GenerationParams,
    GuidanceConfig,
    HalNormalization,
    HalScope,
    SentencePeriod,
    VisualContext,
    load_config_file,
    validate_generation_params,
    validate_guidance_config,
)
from .decoder import (
    DEFAULT_CONFIDENCE_FLOOR,
    decode_episode,
    write_trace,
)
from .errors import ConfigError, MrgdError, ParseError
from .extraction import Lexicon, extract_object_mentions
from .harness import (
    SweepRow,
    emit_csv,
    run_benchmark,
    run_episodes,
    run_sweep,
    summarize,
)
from .metrics import AnnotationRecord, build_report
from .rewards import ObjectMention, combine_scores, recall_reward

INSTRUCTION_PRESETS = {
    "detail": "Describe this image in detail",
    "short": "Describe this image in a few sentences",
    "grounded": (
        "Describe this image in detail. Provide an accurate and objective "
        "description, focusing on verifiable visual elements such as colors, "
        "textures, shapes, and compositions. Avoid making assumptions, "
        "inferences, or introducing information not present in the image"
    ),
}

_CAPABILITIES = ("generate", "score", "detect", "embed")


def _parse_period(raw: str) -> SentencePeriod:
    if raw.strip().lower() in ("inf", "infinity"):
        return INFINITY
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"T must be a positive integer or 'inf', got {raw!r}") from None


def _parse_float(raw: str, name: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}") from None


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


@dataclass
class Settings:
    params: GenerationParams
    guidance: GuidanceConfig
    seed: int
    backend_specs: dict[str, str]
    lexicon_path: str | None
    confidence_floor: float


def _resolve_settings(args: argparse.Namespace) -> Settings:
    """Merge defaults, config file, and flags (flags win)."""
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))

    def flag(name, key=None):
        v = getattr(args, name, None)
        if v is not None:
            values[key or name] = str(v)

    flag("w")
    flag("tau")
    flag("k")
    flag("T")
    flag("temperature")
    flag("max_total_tokens")
    flag("max_iterations")
    flag("hal_normalization")
    flag("hal_scope")
    flag("seed")
    flag("lexicon")
    flag("detect_floor")
    for cap in _CAPABILITIES:
        flag(f"backend_{cap}")

    try:
        hal_norm = HalNormalization(values.get("hal_normalization", "none").lower())
    except ValueError:
        raise ConfigError(
            f"hal_normalization must be one of none/minmax, got {values['hal_normalization']!r}"
        ) from None
    try:
        hal_scope = HalScope(values.get("hal_scope", "full_prefix").lower())
    except ValueError:
        raise ConfigError(
            f"hal_scope must be one of full_prefix/last_chunk, got {values['hal_scope']!r}"
        ) from None

    guidance = validate_guidance_config(
        GuidanceConfig(
            w=_parse_float(values.get("w", "1.0"), "w"),
            tau=_parse_float(values.get("tau", "0.5"), "tau"),
            hal_normalization=hal_norm,
            hal_scope=hal_scope,
        )
    )
    params = validate_generation_params(
        GenerationParams(
            k=_parse_int(values.get("k", "1"), "k"),
            T=_parse_period(values.get("T", "1")),
            temperature=_parse_float(values.get("temperature", "1.0"), "temperature"),
            max_total_tokens=_parse_int(values.get("max_total_tokens", "512"), "max_total_tokens"),
            max_iterations=_parse_int(values.get("max_iterations", "64"), "max_iterations"),
        )
    )
    return Settings(
        params=params,
        guidance=guidance,
        seed=_parse_int(values.get("seed", "0"), "seed"),
        backend_specs={
            cap: values.get(f"backend_{cap}", "") for cap in _CAPABILITIES
        },
        lexicon_path=values.get("lexicon"),
        confidence_floor=_parse_float(
            values.get("detect_floor", str(DEFAULT_CONFIDENCE_FLOOR)), "detect_floor"
        ),
    )


def _instruction(args: argparse.Namespace) -> str:
    if getattr(args, "instruction", None):
        return args.instruction
    preset = getattr(args, "preset", None) or "detail"
    if preset not in INSTRUCTION_PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    return INSTRUCTION_PRESETS[preset]


def _build_backends(settings: Settings, required=_CAPABILITIES):
    specs = dict(settings.backend_specs)
    for cap in _CAPABILITIES:
        if cap not in required and not specs.get(cap):
            specs[cap] = "unused:"
    return backend_factory.build_backend_set(specs)


def _load_lexicon(settings: Settings, world: SimWorld | None) -> Lexicon | None:
    if settings.lexicon_path:
        return Lexicon.from_file(settings.lexicon_path)
    if world is not None:
        return world.lexicon()
    return None


def _load_annotations(path) -> dict[str, tuple[str, ...]]:
    return dict(FixtureDetectBackend.from_file(path).annotations)


def _load_captions_file(path) -> list[tuple[str, str]]:
    """Line-delimited {image_ref, caption} records."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append((obj["image_ref"], obj["caption"]))
            except (json.JSONDecodeError, TypeError, KeyError):
                raise ParseError(path, line_no, "expected {\"image_ref\": ..., \"caption\": ...}") from None
    return records


def _write_captions_file(path, outcomes) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for o in outcomes:
            fh.write(json.dumps(
                {"image_ref": o.ctx.image_ref, "caption": o.result.final_text},
                sort_keys=True,
            ) + "\n")


def _print_report(report) -> None:
    print(f"captions_evaluated = {report.captions_evaluated}")
    print(f"c_instance = {report.c_instance:.6f}")
    print(f"c_sentence = {report.c_sentence:.6f}")
    print(f"recall = {report.recall:.6f}")
    print(f"avg_length = {report.avg_length:.6f}")
    print(f"total_generated_tokens = {report.compute_proxy.total_generated_tokens}")
    print(f"total_backend_calls = {report.compute_proxy.total_backend_calls}")


def _write_report_csv(report, path) -> None:
    header = (
        "c_instance,c_sentence,recall,avg_length,captions_evaluated,"
        "total_generated_tokens,total_backend_calls"
    )
    line = (
        f"{report.c_instance:.6f},{report.c_sentence:.6f},{report.recall:.6f},"
        f"{report.avg_length:.6f},{report.captions_evaluated},"
        f"{report.compute_proxy.total_generated_tokens},"
        f"{report.compute_proxy.total_backend_calls}"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n" + line + "\n")


def _dataset_from_annotations(annotations, instruction):
    return [
        (VisualContext(ref, instruction), AnnotationRecord(ref, frozenset(labels)))
        for ref, labels in sorted(annotations.items())
    ]


def cmd_decode(args) -> int:
    settings = _resolve_settings(args)
    backends, world = _build_backends(settings)
    lexicon = _load_lexicon(settings, world)
    ctx = VisualContext(args.image, _instruction(args))
    result = decode_episode(
        ctx, settings.params, settings.guidance, backends,
        seed=settings.seed, lexicon=lexicon,
        confidence_floor=settings.confidence_floor,
    )
    print(result.final_text)
    if args.trace:
        write_trace(result.trace, args.trace)
    return 0


def cmd_score(args) -> int:
    settings = _resolve_settings(args)
    backends, world = _build_backends(settings, required=("score", "detect", "embed"))
    lexicon = _load_lexicon(settings, world)
    r_hal = backends.score.score(ScoreRequest(args.image, _instruction(args), args.caption))
    detections = backends.detect.detect(DetectRequest(args.image))
    refs = [
        ObjectMention(d.label, d.label.lower())
        for d in detections
        if d.confidence >= settings.confidence_floor
    ]
    if lexicon is None:
        lexicon = Lexicon.identity([m.canonical for m in refs])
    preds = extract_object_mentions(args.caption, lexicon)
    r_rec = recall_reward(
        refs, preds,
        lambda labels: backends.embed.embed(EmbedRequest(tuple(labels))),
        settings.guidance.tau,
    )
    combined = combine_scores(r_hal, r_rec, settings.guidance.w)
    print(f"r_hal = {r_hal:.6f}")
    print(f"r_rec = {r_rec:.6f}")
    print(f"combined = {combined:.6f}")
    return 0


def cmd_metrics(args) -> int:
    lexicon = Lexicon.from_file(args.lexicon)
    annotations = _load_annotations(args.annotations)
    records = _load_captions_file(args.captions)
    captions = []
    texts = []
    for image_ref, caption in records:
        if image_ref not in annotations:
            raise ConfigError(f"no annotation for image_ref {image_ref!r}")
        mentions = [m.canonical for m in extract_object_mentions(caption, lexicon)]
        captions.append((mentions, AnnotationRecord(image_ref, frozenset(annotations[image_ref]))))
        texts.append(caption)
    report = build_report(captions, texts)
    _print_report(report)
    if args.out:
        _write_report_csv(report, args.out)
    return 0


def cmd_bench(args) -> int:
    settings = _resolve_settings(args)
    backends, world = _build_backends(settings)
    lexicon = _load_lexicon(settings, world)
    instruction = _instruction(args)
    if args.annotations:
        annotations = _load_annotations(args.annotations)
        dataset = _dataset_from_annotations(annotations, instruction)
        if lexicon is None:
            labels = {label for objs in annotations.values() for label in objs}
            lexicon = Lexicon.identity(labels)
    elif world is not None:
        dataset = world.dataset(instruction)
    else:
        raise ConfigError("bench requires --annotations or a sim backend")
    if lexicon is None:
        raise ConfigError("bench requires --lexicon when not using a sim backend")
    if args.episodes:
        dataset = dataset[: args.episodes]
    outcomes = run_episodes(
        dataset, settings.params, settings.guidance, backends,
        lexicon=lexicon, seed=settings.seed,
        confidence_floor=settings.confidence_floor,
    )
    report = summarize(outcomes)
    _print_report(report)
    if args.out:
        _write_report_csv(report, args.out)
    if args.captions_out:
        _write_captions_file(args.captions_out, outcomes)
    return 0


def _parse_list(raw: str, parse_one, name: str) -> list:
    items = [s for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"empty list for {name}")
    return [parse_one(s.strip()) for s in items]


def cmd_sweep(args) -> int:
    settings = _resolve_settings(args)
    backends, world = _build_backends(settings)
    lexicon = _load_lexicon(settings, world)
    instruction = _instruction(args)
    if args.annotations:
        annotations = _load_annotations(args.annotations)
        dataset = _dataset_from_annotations(annotations, instruction)
        if lexicon is None:
            labels = {label for objs in annotations.values() for label in objs}
            lexicon = Lexicon.identity(labels)
    elif world is not None:
        dataset = world.dataset(instruction)
    else:
        raise ConfigError("sweep requires --annotations or a sim backend")
    if args.episodes:
        dataset = dataset[: args.episodes]

    w_values = _parse_list(args.w_values, lambda s: _parse_float(s, "w"), "--w")
    k_values = _parse_list(args.k_values, lambda s: _parse_int(s, "k"), "--k")
    t_values = _parse_list(args.t_values, _parse_period, "--T")
    for k in k_values:
        validate_generation_params(GenerationParams(k=k, T=1))
    for w in w_values:
        validate_guidance_config(GuidanceConfig(w=w))
    for t in t_values:
        validate_generation_params(GenerationParams(k=1, T=t))

    def progress(done, total):
        print(f"sweep: cell {done}/{total}", file=sys.stderr)

    out_path = Path(args.out)
    try:
        rows = run_sweep(
            dataset, w_values, k_values, t_values,
            settings.params, settings.guidance, backends,
            lexicon=lexicon, seed=settings.seed, progress=progress,
        )
        emit_csv(rows, out_path)
    except MrgdError:
        # never leave a partial CSV behind
        if out_path.exists():
            out_path.unlink()
        raise
    if args.plot:
        from .plotting import render_sweep_figures

        for fig_path in render_sweep_figures(rows, args.plot):
            print(f"wrote {fig_path}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    settings = _resolve_settings(args)
    world = SimWorld.from_file(args.world)
    from .backends.sim import make_sim_backend_set

    backends = make_sim_backend_set(world)
    dataset = world.dataset(_instruction(args))
    if args.episodes:
        dataset = dataset[: args.episodes]
    outcomes = run_episodes(
        dataset, settings.params, settings.guidance, backends,
        lexicon=world.lexicon(), seed=settings.seed,
    )
    report = summarize(outcomes)
    _print_report(report)
    if args.out:
        _write_report_csv(report, args.out)
    if args.captions_out:
        _write_captions_file(args.captions_out, outcomes)
    return 0


def _add_common_flags(p: argparse.ArgumentParser, backends: bool = True):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--w")
    p.add_argument("--tau")
    p.add_argument("--k")
    p.add_argument("--T", dest="T")
    p.add_argument("--temperature")
    p.add_argument("--max-total-tokens", dest="max_total_tokens")
    p.add_argument("--max-iterations", dest="max_iterations")
    p.add_argument("--hal-normalization", dest="hal_normalization", choices=["none", "minmax"])
    p.add_argument("--hal-scope", dest="hal_scope", choices=["full_prefix", "last_chunk"])
    p.add_argument("--lexicon")
    p.add_argument("--detect-floor", dest="detect_floor")
    p.add_argument("--preset", choices=sorted(INSTRUCTION_PRESETS))
    if backends:
        for cap in _CAPABILITIES:
            p.add_argument(f"--backend-{cap}", dest=f"backend_{cap}",
                           help="URL, fixture:path, or sim:path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrgd",
        description="Reward-guided caption decoding engine and evaluation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="guided-decode one caption")
    _add_common_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--instruction")
    p.add_argument("--trace", help="write per-iteration trace (JSON lines)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("score", help="score one caption against an image")
    _add_common_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--caption", required=True)
    p.add_argument("--instruction")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("metrics", help="corpus metrics from a captions file")
    p.add_argument("--captions", required=True, help="JSON lines {image_ref, caption}")
    p.add_argument("--annotations", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", help="write the report as CSV")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="decode a dataset and report metrics")
    _add_common_flags(p)
    p.add_argument("--annotations")
    p.add_argument("--instruction")
    p.add_argument("--episodes", type=int)
    p.add_argument("--out", help="write the report as CSV")
    p.add_argument("--captions-out", dest="captions_out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="(w, k, T) grid sweep to CSV")
    _add_common_flags(p)
    p.add_argument("--annotations")
    p.add_argument("--instruction")
    p.add_argument("--episodes", type=int)
    p.add_argument("--w-values", "--w-list", dest="w_values", required=True,
                   help="comma-separated w values")
    p.add_argument("--k-values", dest="k_values", required=True,
                   help="comma-separated k values")
    p.add_argument("--T-values", dest="t_values", required=True,
                   help="comma-separated T values (integers or inf)")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="directory for rendered figures")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="run episodes on a synthetic world")
    _add_common_flags(p, backends=False)
    p.add_argument("--world", required=True, help="sim world JSON file")
    p.add_argument("--instruction")
    p.add_argument("--episodes", type=int)
    p.add_argument("--out")
    p.add_argument("--captions-out", dest="captions_out")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MrgdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
