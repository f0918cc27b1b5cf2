"""Coefficient definition data structures."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(slots=True)
class CoefficientDef:
    """A scalar drift or noise coefficient preset."""

    id: str
    kind: str
    offset: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    notes: str | None = None

    @classmethod
    def constant(cls, value: float, id: str = "inline") -> CoefficientDef:
        return cls(id=id, kind="constant", offset=float(value))
