"""TOML loading for experiment configs."""
from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

from .errors import DataLoadError


def load_toml(path: Path) -> dict[str, object]:
    """Load a TOML document and raise DataLoadError on failure."""
    try:
        with path.open("rb") as handle:
            return tomllib.load(handle)
    except FileNotFoundError as exc:
        raise DataLoadError(f"Config file not found: {path}") from exc
    except OSError as exc:
        raise DataLoadError(f"Unable to read config file: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataLoadError(f"Invalid TOML in {path}: {exc}") from exc
