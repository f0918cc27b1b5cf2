"""Profile definition data structures."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(slots=True)
class ProfileDef:
    """A closed-form function on the circle: a constant or a trigonometric polynomial."""

    id: str
    kind: str
    a0: float = 0.0
    cos: tuple[float, ...] = field(default_factory=tuple)
    sin: tuple[float, ...] = field(default_factory=tuple)
    notes: str | None = None

    @classmethod
    def constant(cls, value: float, id: str = "inline") -> ProfileDef:
        return cls(id=id, kind="constant", a0=float(value))
