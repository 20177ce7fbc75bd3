"""Serve one adapter capability over HTTP."""

from __future__ import annotations

import argparse
import sys

from .apps import create_app
from .config import CAPABILITY_PATHS, AdapterConfig, AdapterError
from .replay import ReplayEngine


def _build_engine(args) -> object:
    if args.replay:
        return ReplayEngine.from_file(
            CAPABILITY_PATHS[args.capability], args.replay
        )
    from . import models

    cfg = AdapterConfig(
        capability=args.capability,
        checkpoint=args.checkpoint or "",
        device=args.device,
        max_batch_size=args.max_batch_size,
    )
    if not cfg.checkpoint:
        raise AdapterError("--checkpoint is required unless --replay is given")
    if args.capability == "generate":
        return models.GenerateEngine(cfg)
    if args.capability == "score":
        return models.ScoreEngine(cfg)
    if args.capability == "detect":
        if not args.vocabulary:
            raise AdapterError("detect requires --vocabulary (comma-separated labels)")
        return models.DetectEngine(cfg, [s.strip() for s in args.vocabulary.split(",")])
    return models.EmbedEngine(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrgd-adapters",
        description="Serve one mrgd/1 wire-protocol capability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("serve", help="run one capability server")
    p.add_argument("--capability", required=True, choices=sorted(CAPABILITY_PATHS))
    p.add_argument("--checkpoint", help="model checkpoint identifier")
    p.add_argument("--device", default="cpu")
    p.add_argument("--max-batch-size", dest="max_batch_size", type=int, default=8)
    p.add_argument("--vocabulary", help="candidate labels for the detector")
    p.add_argument("--replay", help="serve a recorded transcript instead of a model")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        engine = _build_engine(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    app = create_app(args.capability, engine)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
