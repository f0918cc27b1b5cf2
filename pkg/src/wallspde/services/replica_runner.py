"""Replica-parallel execution with per-replica failure isolation."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, TypeVar

from wallspde.core.errors import NumericalBlowUpError
from wallspde.services.errors import ReplicaAbortedError

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class ReplicaOutcome(Generic[T]):
    replica_id: int
    value: T | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True, slots=True)
class ReplicaBatch(Generic[T]):
    """Outcomes in replica order, completed and aborted alike."""

    outcomes: tuple[ReplicaOutcome[T], ...]

    def values(self) -> list[T]:
        return [outcome.value for outcome in self.outcomes if outcome.ok]

    def failures(self) -> dict[int, str]:
        return {outcome.replica_id: outcome.error for outcome in self.outcomes if not outcome.ok}

    def require_complete(self) -> list[T]:
        failures = self.failures()
        if failures:
            raise ReplicaAbortedError(failures)
        return self.values()


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValueError("threads must be >= 1.")
    return threads


def run_replicas(task: Callable[[int], T], replicas: int, threads: int | None = None) -> ReplicaBatch[T]:
    """
    Run `task(replica_id)` for every replica id.

    A NumericalBlowUpError aborts only its own replica; any other exception propagates.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1.")
    workers = min(resolve_threads(threads), replicas)

    def guarded(replica_id: int) -> ReplicaOutcome[T]:
        try:
            return ReplicaOutcome(replica_id, task(replica_id))
        except NumericalBlowUpError as exc:
            logger.warning("Replica %d aborted: %s", replica_id, exc)
            return ReplicaOutcome(replica_id, None, str(exc))

    if workers == 1:
        outcomes = [guarded(replica_id) for replica_id in range(replicas)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(guarded, range(replicas)))
    return ReplicaBatch(tuple(outcomes))
