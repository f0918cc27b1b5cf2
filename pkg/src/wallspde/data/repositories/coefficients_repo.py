"""Repository for drift and noise coefficient presets."""
from __future__ import annotations

from typing import Dict

from wallspde.data.errors import DataValidationError
from wallspde.data.repositories.base import RepositoryBase
from wallspde.domain.coefficients import COEFFICIENT_KINDS
from wallspde.domain.defs import CoefficientDef


class CoefficientsRepository(RepositoryBase[CoefficientDef]):
    """Loads and validates scalar coefficient presets."""

    def __init__(self, base_path=None) -> None:
        super().__init__("coefficients.json", base_path)

    def _build(self, raw: dict[str, object]) -> Dict[str, CoefficientDef]:
        coefficients_raw = self._require_mapping(raw, "coefficients.json")
        return {
            coefficient_id: self.parse(coefficient_id, mapping, f"coefficient '{coefficient_id}'")
            for coefficient_id, mapping in self._iter_entries(coefficients_raw, "coefficient")
        }

    @classmethod
    def parse(cls, coefficient_id: str, mapping: dict[str, object], context: str) -> CoefficientDef:
        kind = cls._require_str(mapping.get("kind"), f"{context} kind")
        if kind not in COEFFICIENT_KINDS:
            raise DataValidationError(
                f"{context} kind must be one of {', '.join(COEFFICIENT_KINDS)} ('{kind}' found)."
            )
        notes = mapping.get("notes")
        if notes is not None:
            notes = cls._require_str(notes, f"{context} notes")
        if kind == "constant":
            value = cls._require_float(mapping.get("value"), f"{context} value")
            return CoefficientDef(id=coefficient_id, kind=kind, offset=value, notes=notes)
        if kind == "linear":
            return CoefficientDef(
                id=coefficient_id,
                kind=kind,
                offset=cls._optional_float(mapping, "intercept", context, 0.0),
                amplitude=cls._require_float(mapping.get("slope"), f"{context} slope"),
                notes=notes,
            )
        return CoefficientDef(
            id=coefficient_id,
            kind=kind,
            offset=cls._optional_float(mapping, "offset", context, 0.0),
            amplitude=cls._require_float(mapping.get("amplitude"), f"{context} amplitude"),
            frequency=cls._optional_float(mapping, "frequency", context, 1.0),
            notes=notes,
        )
