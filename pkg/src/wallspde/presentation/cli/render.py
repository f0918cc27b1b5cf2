"""Shared CLI rendering helpers."""
from __future__ import annotations

import logging
import os
from typing import Iterable

from wallspde.services.manifest import RunManifest

DEBUG_ENV = "WALLSPDE_DEBUG"


def debug_enabled() -> bool:
    """Return True only when WALLSPDE_DEBUG is explicitly set to '1'."""
    return os.getenv(DEBUG_ENV) == "1"


def configure_logging() -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug_enabled() else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def render_heading(title: str) -> None:
    """Print a consistent section heading."""
    print(f"\n=== {title} ===")


def render_bullet_lines(lines: Iterable[str]) -> None:
    """Print bullet-prefixed lines."""
    for line in lines:
        print(f"- {line}")


def format_check(name: str, passed: bool, value: float | None, threshold: float | None) -> str:
    status = "PASS" if passed else "FAIL"
    if value is None:
        return f"{name}: {status}"
    if threshold is None:
        return f"{name}: {status} ({value:.6g})"
    return f"{name}: {status} ({value:.6g} vs {threshold:.6g})"


def render_manifest(manifest: RunManifest) -> None:
    """Print the checks, aborted replicas and artifacts of a finished run."""
    render_heading(manifest.subcommand)
    if manifest.checks:
        render_bullet_lines(
            format_check(check.name, check.passed, check.value, check.threshold) for check in manifest.checks
        )
    if manifest.aborted:
        render_heading("Aborted replicas")
        render_bullet_lines(f"{replica}: {message}" for replica, message in manifest.aborted.items())
    render_heading("Artifacts")
    render_bullet_lines(sorted(manifest.artifacts))
    print(f"\nWall clock: {manifest.wall_clock_seconds:.2f}s")
