"""Counter-based random streams built on numpy's Philox generator."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, TypedDict

import numpy as np

from wallspde.core.types import STREAM_TAGS, StreamTag

_STREAM_CODES: dict[str, int] = {tag: code for code, tag in enumerate(STREAM_TAGS, start=1)}
_MAX_SEED = 2**64
# Philox counters are 256 bits wide; the step index owns the top 64 bits.
_STEP_SHIFT = 192


class SeedManifest(TypedDict):
    """JSON-friendly description of the streams used by an experiment."""

    master_seed: int
    replicas: int
    stream_tags: list[str]


@dataclass(frozen=True, slots=True)
class SeedSpec:
    """Identifies one independent noise stream of one replica."""

    master_seed: int
    replica_id: int = 0
    stream_tag: StreamTag = "W1"
    substream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.master_seed) < _MAX_SEED:
            raise ValueError("master_seed must be a 64-bit non-negative integer.")
        if self.replica_id < 0:
            raise ValueError("replica_id must be >= 0.")
        if self.stream_tag not in _STREAM_CODES:
            raise ValueError(f"Unknown stream tag '{self.stream_tag}'.")
        if self.substream < 0:
            raise ValueError("substream must be >= 0.")

    def with_tag(self, tag: StreamTag) -> SeedSpec:
        """Return the sibling stream with another tag."""
        return replace(self, stream_tag=tag)

    def with_substream(self, substream: int) -> SeedSpec:
        """Return an independent copy of this stream, e.g. for a second chain."""
        return replace(self, substream=substream)

    def to_payload(self) -> dict[str, object]:
        return {
            "master_seed": int(self.master_seed),
            "replica_id": int(self.replica_id),
            "stream_tag": self.stream_tag,
            "substream": int(self.substream),
        }


@lru_cache(maxsize=4096)
def _stream_key(master_seed: int, replica_id: int, tag_code: int, substream: int) -> tuple[int, int]:
    sequence = np.random.SeedSequence(
        entropy=int(master_seed),
        spawn_key=(int(replica_id), int(tag_code), int(substream)),
    )
    words = sequence.generate_state(2, dtype=np.uint64)
    return int(words[0]), int(words[1])


class RNG:
    """Generator for one (stream, step) cell; identical inputs give identical draws."""

    def __init__(self, spec: SeedSpec, step_index: int) -> None:
        if step_index < 0:
            raise ValueError("step_index must be >= 0.")
        low, high = _stream_key(
            spec.master_seed, spec.replica_id, _STREAM_CODES[spec.stream_tag], spec.substream
        )
        bit_generator = np.random.Philox(
            key=np.array([low, high], dtype=np.uint64),
            counter=int(step_index) << _STEP_SHIFT,
        )
        self._generator = np.random.Generator(bit_generator)

    def normal(self, scale: float, size: int) -> np.ndarray:
        """Return `size` centered Gaussian draws with standard deviation `scale`."""
        return self._generator.normal(0.0, scale, size)

    def standard_normal(self, size: int) -> np.ndarray:
        return self._generator.standard_normal(size)

    def random(self, size: int | None = None) -> float | np.ndarray:
        """Return uniform draws from [0.0, 1.0)."""
        return self._generator.random(size)


def seed_manifest(master_seed: int, replicas: int, tags: Iterable[StreamTag] = STREAM_TAGS) -> SeedManifest:
    """Describe the streams of an experiment for its JSON manifest."""
    return {
        "master_seed": int(master_seed),
        "replicas": int(replicas),
        "stream_tags": [str(tag) for tag in tags],
    }
