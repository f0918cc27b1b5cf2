"""File-system helpers for run artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

import numpy as np

from wallspde.data.paths import get_output_dir


def format_cell(value: object) -> str:
    """Exact text for a CSV cell; floats use 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _json_default(value: object) -> object:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable.")


class ArtifactStore:
    """Writes the CSV and JSON files of one run into a single directory."""

    def __init__(self, base_dir: Path | str | None = None) -> None:
        self._base_dir = Path(base_dir) if base_dir is not None else get_output_dir()
        self._written: list[str] = []

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    @property
    def written(self) -> list[str]:
        return list(self._written)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        """Persist rows under a header row, UTF-8 with LF line endings."""
        path = self._prepare(name)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(cell) for cell in row])
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._prepare(name)
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8"
        )
        return path

    def _prepare(self, name: str) -> Path:
        self._validate_name(name)
        self._base_dir.mkdir(parents=True, exist_ok=True)
        if name not in self._written:
            self._written.append(name)
        return self._base_dir / name

    def _validate_name(self, name: str) -> None:
        if not name or Path(name).name != name or name.startswith("."):
            raise ValueError(f"Artifact name '{name}' must be a plain file name.")
