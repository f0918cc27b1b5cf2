"""Repository for wall pair presets."""
from __future__ import annotations

from typing import Dict

import numpy as np

from wallspde.data.errors import DataValidationError
from wallspde.data.repositories.base import RepositoryBase
from wallspde.data.repositories.profiles_repo import ProfilesRepository
from wallspde.domain.defs import ProfileDef, WallsDef
from wallspde.domain.profiles import Profile

# Resolution of the separation check h1 < h2.
SEPARATION_SAMPLES = 1024


class WallsRepository(RepositoryBase[WallsDef]):
    """Loads wall pairs and checks that the lower wall stays strictly below the upper one."""

    def __init__(self, base_path=None) -> None:
        super().__init__("walls.json", base_path)

    def _build(self, raw: dict[str, object]) -> Dict[str, WallsDef]:
        walls_raw = self._require_mapping(raw, "walls.json")
        definitions: Dict[str, WallsDef] = {}
        for walls_id, mapping in self._iter_entries(walls_raw, "walls"):
            context = f"walls '{walls_id}'"
            name = self._require_str(mapping.get("name", walls_id), f"{context} name").strip()
            if not name:
                raise DataValidationError(f"{context} name must not be empty.")
            lower = ProfilesRepository.parse(
                f"{walls_id}.lower",
                self._require_mapping(mapping.get("lower"), f"{context} lower"),
                f"{context} lower",
            )
            upper = ProfilesRepository.parse(
                f"{walls_id}.upper",
                self._require_mapping(mapping.get("upper"), f"{context} upper"),
                f"{context} upper",
            )
            require_separated(lower, upper, context)
            notes = mapping.get("notes")
            if notes is not None:
                notes = self._require_str(notes, f"{context} notes")
            definitions[walls_id] = WallsDef(id=walls_id, name=name, lower=lower, upper=upper, notes=notes)
        return definitions


def to_profile(definition: ProfileDef) -> Profile:
    if definition.kind == "constant":
        return Profile.constant(definition.a0)
    return Profile.fourier(definition.a0, definition.cos, definition.sin)


def require_separated(lower: ProfileDef, upper: ProfileDef, context: str) -> None:
    x = np.linspace(0.0, 2.0 * np.pi, SEPARATION_SAMPLES, endpoint=False)
    gap = float(np.min(to_profile(upper)(x) - to_profile(lower)(x)))
    if gap <= 0.0:
        raise DataValidationError(f"{context} lower wall must stay strictly below the upper wall.")
