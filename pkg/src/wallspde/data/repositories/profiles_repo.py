"""Repository for initial-data and wall profile definitions."""
from __future__ import annotations

from typing import Dict

from wallspde.data.errors import DataValidationError
from wallspde.data.repositories.base import RepositoryBase
from wallspde.domain.defs import ProfileDef


class ProfilesRepository(RepositoryBase[ProfileDef]):
    """Loads and validates closed-form profiles."""

    def __init__(self, base_path=None) -> None:
        super().__init__("profiles.json", base_path)

    def _build(self, raw: dict[str, object]) -> Dict[str, ProfileDef]:
        profiles_raw = self._require_mapping(raw, "profiles.json")
        return {
            profile_id: self.parse(profile_id, mapping, f"profile '{profile_id}'")
            for profile_id, mapping in self._iter_entries(profiles_raw, "profile")
        }

    @classmethod
    def parse(cls, profile_id: str, mapping: dict[str, object], context: str) -> ProfileDef:
        """Build a ProfileDef from `{kind: constant, value}` or `{kind: fourier, a0, cos, sin}`."""
        kind = cls._require_str(mapping.get("kind"), f"{context} kind")
        notes = mapping.get("notes")
        if notes is not None:
            notes = cls._require_str(notes, f"{context} notes")
        if kind == "constant":
            value = cls._require_float(mapping.get("value"), f"{context} value")
            return ProfileDef(id=profile_id, kind=kind, a0=value, notes=notes)
        if kind == "fourier":
            return ProfileDef(
                id=profile_id,
                kind=kind,
                a0=cls._optional_float(mapping, "a0", context, 0.0),
                cos=cls._require_float_list(mapping.get("cos", []), f"{context} cos"),
                sin=cls._require_float_list(mapping.get("sin", []), f"{context} sin"),
                notes=notes,
            )
        raise DataValidationError(f"{context} kind must be 'constant' or 'fourier' ('{kind}' found).")
