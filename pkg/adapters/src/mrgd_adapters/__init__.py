"""Model-serving adapters for the mrgd/1 wire protocol."""

from .apps import create_app
from .config import CAPABILITY_PATHS, AdapterConfig, AdapterError
from .replay import Recorder, ReplayEngine, load_transcript

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "CAPABILITY_PATHS",
    "Recorder",
    "ReplayEngine",
    "create_app",
    "load_transcript",
]

__version__ = "0.1.0"
