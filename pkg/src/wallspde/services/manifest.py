"""Run manifests: everything needed to reproduce an artifact directory."""
from __future__ import annotations

from dataclasses import dataclass, field

from wallspde.core.rng import seed_manifest
from wallspde.domain.defs import ExperimentConfig

MANIFEST_FORMAT = "wallspde-run/1"


@dataclass(slots=True)
class CheckResult:
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    detail: str | None = None

    def to_payload(self) -> dict[str, object]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass(slots=True)
class RunManifest:
    subcommand: str
    config: ExperimentConfig
    checks: list[CheckResult] = field(default_factory=list)
    aborted: dict[int, str] = field(default_factory=dict)
    summary: dict[str, object] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def failed_checks(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_payload(self) -> dict[str, object]:
        seeds = self.config.seeds
        return {
            "format": MANIFEST_FORMAT,
            "subcommand": self.subcommand,
            "config": self.config.to_payload(),
            "seeds": dict(seed_manifest(seeds.master_seed, seeds.replicas)),
            "aborted_replicas": {str(replica): message for replica, message in self.aborted.items()},
            "checks": [check.to_payload() for check in self.checks],
            "summary": self.summary,
            "artifacts": sorted(self.artifacts),
            "wall_clock_seconds": self.wall_clock_seconds,
        }
