"""Pluggable generation/scoring/detection/embedding backends.

Backend specs accepted on the command line and in config files:
  http://host:port or https://...   remote service speaking the wire protocol
  fixture:/path/to/file.json        file-backed deterministic fixture
  sim:/path/to/world.json           seeded synthetic-world simulator
"""

from __future__ import annotations

from ..errors import ConfigError
from .fixtures import (
    FixtureDetectBackend,
    FixtureEmbedBackend,
    FixtureGenerateBackend,
    FixtureScoreBackend,
)
from .http import (
    HttpDetectBackend,
    HttpEmbedBackend,
    HttpGenerateBackend,
    HttpScoreBackend,
)
from .protocol import BackendSet
from .sim import SimWorld, make_sim_backend_set, sim_embed_backend

_FIXTURE_CLASSES = {
    "generate": FixtureGenerateBackend,
    "score": FixtureScoreBackend,
    "detect": FixtureDetectBackend,
    "embed": FixtureEmbedBackend,
}

_HTTP_CLASSES = {
    "generate": HttpGenerateBackend,
    "score": HttpScoreBackend,
    "detect": HttpDetectBackend,
    "embed": HttpEmbedBackend,
}


class _UnconfiguredBackend:
    """Placeholder for a capability the current command does not need."""

    def __init__(self, capability: str):
        self._capability = capability

    def _fail(self, *_args, **_kwargs):
        raise ConfigError(f"no backend configured for {self._capability!r}")

    generate = score = detect = embed = _fail


def build_backend_set(specs: dict[str, str]) -> tuple[BackendSet, SimWorld | None]:
    """Construct the four backends from spec strings.

    specs maps capability name (generate/score/detect/embed) to a spec string.
    Sim worlds are shared across capabilities that reference the same path.
    Returns the backend set plus the sim world, if any (its lexicon and
    dataset are useful defaults downstream).
    """
    worlds: dict[str, SimWorld] = {}
    backends: dict[str, object] = {}
    primary_world: SimWorld | None = None

    for capability in ("generate", "score", "detect", "embed"):
        spec = specs.get(capability)
        if not spec:
            raise ConfigError(f"no backend configured for {capability!r}")
        if spec == "unused:":
            backends[capability] = _UnconfiguredBackend(capability)
        elif spec.startswith(("http://", "https://")):
            backends[capability] = _HTTP_CLASSES[capability](spec)
        elif spec.startswith("fixture:"):
            backends[capability] = _FIXTURE_CLASSES[capability].from_file(spec[len("fixture:"):])
        elif spec.startswith("sim:"):
            path = spec[len("sim:"):]
            if path not in worlds:
                worlds[path] = SimWorld.from_file(path)
            world = worlds[path]
            if primary_world is None:
                primary_world = world
            sim_set = make_sim_backend_set(world)
            backends[capability] = getattr(sim_set, capability)
        else:
            raise ConfigError(
                f"unrecognized backend spec for {capability!r}: {spec!r} "
                "(expected http(s)://, fixture:, or sim:)"
            )

    return (
        BackendSet(
            generate=backends["generate"],
            score=backends["score"],
            detect=backends["detect"],
            embed=backends["embed"],
        ),
        primary_world,
    )
