"""Service-layer exceptions."""


class ReplicaAbortedError(Exception):
    """Raised when one or more replicas hit a numerical blow-up."""

    def __init__(self, failures: dict[int, str]) -> None:
        self.failures = dict(sorted(failures.items()))
        ids = ", ".join(str(replica) for replica in self.failures)
        super().__init__(f"{len(self.failures)} replica(s) aborted: {ids}.")


class AcceptanceError(Exception):
    """Raised when a check subcommand's thresholds are violated."""

    def __init__(self, failed: list[str]) -> None:
        self.failed = list(failed)
        super().__init__(f"Acceptance checks failed: {', '.join(self.failed)}.")
