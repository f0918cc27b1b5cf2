"""Wall pair definition data structures."""
from __future__ import annotations

from dataclasses import dataclass

from .profile_def import ProfileDef


@dataclass(slots=True)
class WallsDef:
    """Lower and upper wall profiles of a named preset."""

    id: str
    name: str
    lower: ProfileDef
    upper: ProfileDef
    notes: str | None = None
