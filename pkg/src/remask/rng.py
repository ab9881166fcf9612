"""Seeded random streams.

Every random decision in the pipeline draws from a named sub-stream derived
from one master seed, so adding a new consumer never perturbs the draws seen
by existing ones. Stream derivation hashes ``"{seed}:{name}"`` with SHA-256,
which is stable across platforms and Python processes (unlike ``hash()``).
"""

from __future__ import annotations

import hashlib
import random


def stream(seed: int, name: str) -> random.Random:
    """Return a fresh ``random.Random`` for the given master seed and stream name."""
    material = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(material[:8], "big"))


class RngHub:
    """Hands out named sub-streams of a single master seed.

    Streams are cached, so repeated requests for the same name continue one
    stateful sequence within a run.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        if name not in self._streams:
            self._streams[name] = stream(self.seed, name)
        return self._streams[name]
