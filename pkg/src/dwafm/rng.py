"""Named, seedable, serializable random streams.

One Philox (counter-based) stream per purpose so that e.g. dropout draws
never perturb the batch-shuffle sequence. Stream state round-trips through
plain dicts, which checkpoint manifests store for bit-identical resume.
"""

from __future__ import annotations

import numpy as np

STREAM_NAMES = ("init", "dropout", "shuffle", "synthetic")


def _stream_key(seed: int, name: str) -> list[int]:
    # fold the stream name into the 128-bit Philox key next to the seed
    digest = sum((i + 1) * b for i, b in enumerate(name.encode())) & 0xFFFFFFFF
    return [seed & 0xFFFFFFFFFFFFFFFF, digest]


class RngStreams:
    """A family of independent generators derived from one root seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            bitgen = np.random.Philox(key=_stream_key(self.seed, name))
            self._streams[name] = np.random.Generator(bitgen)
        return self._streams[name]

    def state(self) -> dict:
        """JSON-serializable snapshot of seed and all touched streams."""
        return {
            "seed": self.seed,
            "streams": {
                name: _jsonify(gen.bit_generator.state)
                for name, gen in self._streams.items()
            },
        }

    @classmethod
    def from_state(cls, state: dict) -> "RngStreams":
        rs = cls(state["seed"])
        for name, st in state.get("streams", {}).items():
            gen = rs.get(name)
            gen.bit_generator.state = st
        return rs


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj
