"""Optional helpers around the core simulation.

- timed: log how long a run or command took
- run_manifest / record_output: collect manifest fields while a command runs
- serve / replay: session protocol transports (socket listener, NDJSON file)
"""

from __future__ import annotations

from .bridge import BridgeSession, replay, serve
from .decorators import timed
from .events import add_manifest_fields, get_manifest_fields, record_output, run_manifest

__all__ = [
    "BridgeSession",
    "add_manifest_fields",
    "get_manifest_fields",
    "record_output",
    "replay",
    "run_manifest",
    "serve",
    "timed",
]
