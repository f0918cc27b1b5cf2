"""Shared type aliases for the core and domain layers."""
from typing import Literal

StreamTag = Literal["W1", "W2", "AUX"]
SchemeName = Literal["penalized", "projected"]
PropagatorName = Literal["exponential", "implicit"]
KernelRepresentation = Literal["spectral", "image", "auto"]

STREAM_TAGS: tuple[StreamTag, ...] = ("W1", "W2", "AUX")

__all__ = [
    "KernelRepresentation",
    "PropagatorName",
    "STREAM_TAGS",
    "SchemeName",
    "StreamTag",
]
