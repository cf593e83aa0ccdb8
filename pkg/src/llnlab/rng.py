"""Deterministic, splittable uniform streams shared by every sampler.

The generator is Philox4x64 keyed by ``(seed, stream_id)``.  It is counter
based: a key regenerates its whole sequence from scratch, and distinct keys
give statistically independent streams, so parallel workers never share
state.  The generator choice is fixed for the lifetime of this repository;
changing it would invalidate every recorded artifact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["RngStream", "make_rng_stream"]

_WORD = 2**64

# Child experiments within one command are spaced this far apart in stream id
# so that per-replicate substreams (offsets 0..reps-1) can never collide.
CHILD_SPACING = 2**32


@dataclass(frozen=True)
class RngStream:
    """Immutable handle for one reproducible uniform stream.

    ``position`` is an opaque skip-ahead offset in bit-generator advance
    units (not in drawn values); streams at different positions of the same
    key are deterministic but not slices of one another.
    """

    seed: int
    stream_id: int
    position: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id", "position"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _WORD:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def bit_generator(self) -> np.random.Philox:
        bg = np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        if self.position:
            bg.advance(self.position)
        return bg

    def generator(self) -> np.random.Generator:
        """Fresh generator; identical calls yield identical sequences."""
        return np.random.Generator(self.bit_generator())

    def uniforms(self, n: int) -> np.ndarray:
        """The first ``n`` doubles in [0, 1) of this stream."""
        return self.generator().random(int(n))

    def substream(self, offset: int) -> "RngStream":
        """Independent stream with the stream id shifted by ``offset``."""
        return RngStream(self.seed, (self.stream_id + int(offset)) % _WORD, 0)

    def child(self, index: int) -> "RngStream":
        """Base stream for sub-experiment ``index`` (reserves replicate room)."""
        return self.substream(int(index) * CHILD_SPACING)

    def advanced(self, steps: int) -> "RngStream":
        return replace(self, position=(self.position + int(steps)) % _WORD)


def make_rng_stream(seed: int, stream_id: int = 0) -> RngStream:
    """Stream satisfying the reproducibility and independence contracts."""
    return RngStream(int(seed), int(stream_id))
