"""Replica studies of the coupled pair: coupling probabilities, U trend, brackets and drift tilt."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from wallspde.core.errors import InsufficientDataError
from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import Field, WallPair
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.coupling import (
    CouplingDiagnostics,
    CouplingParams,
    DriftTilt,
    GeneralCouplingRun,
    run_coupled_general,
    run_coupled_ordered,
    run_tilted,
)
from wallspde.domain.reflected import PenalizedParams, run_reflected
from wallspde.services.errors import ReplicaAbortedError
from wallspde.services.factories import Experiment
from wallspde.services.replica_runner import run_replicas

logger = logging.getLogger(__name__)

U_THRESHOLD = 0.01


def proportion(hits: int, total: int) -> tuple[float, float]:
    """Empirical probability and its binomial standard error."""
    if total < 1:
        raise InsufficientDataError("A proportion needs at least one sample.")
    p = hits / total
    return p, math.sqrt(p * (1.0 - p) / total)


@dataclass(frozen=True, slots=True)
class HorizonProbability:
    horizon: float
    probability: float
    stderr: float


def _probabilities_increase(rows: tuple[HorizonProbability, ...]) -> bool:
    return all(b.probability > a.probability or a.probability == 1.0 for a, b in zip(rows, rows[1:]))


@dataclass(frozen=True, slots=True, eq=False)
class QvReport:
    """Per-step bracket ratios over steps with U above the threshold."""

    samples: int
    realized_q01: float
    realized_median: float
    predictable_min: float
    c0_estimate: float | None

    @property
    def passed(self) -> bool:
        if self.c0_estimate is None:
            return self.realized_q01 > 0.0
        return self.realized_q01 >= self.c0_estimate

    def summary(self) -> dict[str, object]:
        return {
            "samples": self.samples,
            "realized_q01": self.realized_q01,
            "realized_median": self.realized_median,
            "predictable_min": self.predictable_min,
            "c0_estimate": self.c0_estimate,
        }


def qv_lower_bound_check(
    diagnostics: CouplingDiagnostics | list[CouplingDiagnostics],
    c0_estimate: float | None = None,
    threshold: float = U_THRESHOLD,
) -> QvReport:
    """
    Ratios dQV_k / (U(t_k) dt) and bracket_rate_k / U(t_k), pooled over the given runs,
    for the steps with U(t_k) > threshold.
    """
    runs = diagnostics if isinstance(diagnostics, list) else [diagnostics]
    realized: list[np.ndarray] = []
    predictable: list[np.ndarray] = []
    for diag in runs:
        keep = diag.step_U > threshold
        realized.append(diag.step_dqv[keep] / (diag.step_U[keep] * diag.dt))
        predictable.append(diag.step_rate[keep] / diag.step_U[keep])
    ratios = np.concatenate(realized) if realized else np.empty(0)
    if ratios.size == 0:
        raise InsufficientDataError(f"U never exceeds {threshold}; no bracket ratios to report.")
    return QvReport(
        samples=int(ratios.size),
        realized_q01=float(np.quantile(ratios, 0.01)),
        realized_median=float(np.median(ratios)),
        predictable_min=float(np.min(np.concatenate(predictable))),
        c0_estimate=c0_estimate,
    )


@dataclass(frozen=True, slots=True, eq=False)
class CouplingStudy:
    """Ordered-pair replicas: coupling probabilities, E[U] trend, centring of M, brackets."""

    diagnostics: tuple[CouplingDiagnostics, ...]
    probabilities: tuple[HorizonProbability, ...]
    mean_U: np.ndarray
    stderr_U: np.ndarray
    aborted: dict[int, str]

    csv_header = ("replica", "t", "U", "M", "QV", "sup_gap")

    def csv_rows(self):
        for replica, diag in enumerate(self.diagnostics):
            for row in diag.csv_rows():
                yield (replica,) + row

    @property
    def times(self) -> np.ndarray:
        return self.diagnostics[0].times

    def taus(self) -> list[float]:
        return [math.inf if diag.tau is None else diag.tau for diag in self.diagnostics]

    def u_nonincreasing(self) -> bool:
        """E[U] never rises by more than two combined standard errors between records."""
        m, s = self.mean_U, self.stderr_U
        return all(m[j + 1] <= m[j] + 2.0 * math.hypot(s[j], s[j + 1]) + 1e-15 for j in range(len(m) - 1))

    def martingale_centering(self) -> tuple[float, float]:
        final = np.array([diag.M[-1] for diag in self.diagnostics])
        stderr = float(np.std(final, ddof=1) / math.sqrt(final.size)) if final.size > 1 else 0.0
        return float(np.mean(final)), stderr

    def m_centered(self) -> bool:
        mean, stderr = self.martingale_centering()
        return abs(mean) <= 3.0 * stderr + 1e-15

    def min_order_gap(self) -> float:
        return min(diag.min_order_gap for diag in self.diagnostics)

    def probabilities_increase(self) -> bool:
        return _probabilities_increase(self.probabilities)

    def summary(self) -> dict[str, object]:
        taus = np.array(self.taus())
        finite = taus[np.isfinite(taus)]
        mean, stderr = self.martingale_centering()
        return {
            "replicas": len(self.diagnostics),
            "coupling_probability": {
                f"{row.horizon:g}": {"probability": row.probability, "stderr": row.stderr}
                for row in self.probabilities
            },
            "tau_quantiles": {
                q: float(np.quantile(finite, float(q))) for q in ("0.25", "0.5", "0.75")
            }
            if finite.size
            else {},
            "mean_U_final": float(self.mean_U[-1]),
            "M_final_mean": mean,
            "M_final_stderr": stderr,
            "min_order_gap": self.min_order_gap(),
            "max_crossing": max(diag.max_crossing for diag in self.diagnostics),
            "crossing_mass": float(sum(diag.crossing_mass for diag in self.diagnostics)),
            "meeting_attempts": int(sum(diag.attempts for diag in self.diagnostics)),
            "meetings": int(sum(diag.meetings for diag in self.diagnostics)),
        }


def coupling_study(
    u0: Field,
    v0: Field,
    walls: WallPair,
    horizons: tuple[float, ...],
    p: PenalizedParams,
    cp: CouplingParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
    record_every: int = 1,
) -> CouplingStudy:
    if not horizons:
        raise ValueError("horizons must not be empty.")
    T = max(horizons)
    logger.info("Coupling %d ordered replicas to T=%g (n=%s)", replicas, T, cp.n)

    def task(replica_id: int) -> CouplingDiagnostics:
        run = run_coupled_ordered(u0, v0, walls, T, p, SeedSpec(master_seed, replica_id), cp, record_every)
        return run.diagnostics

    batch = run_replicas(task, replicas, threads)
    diagnostics = tuple(batch.values())
    if not diagnostics:
        raise ReplicaAbortedError(batch.failures())
    rows = tuple(
        HorizonProbability(h, *proportion(sum(diag.coupled_by(h) for diag in diagnostics), len(diagnostics)))
        for h in sorted(horizons)
    )
    U = np.stack([diag.U for diag in diagnostics])
    stderr = np.std(U, axis=0, ddof=1) / math.sqrt(len(diagnostics)) if len(diagnostics) > 1 else np.zeros(U.shape[1])
    study = CouplingStudy(diagnostics, rows, np.mean(U, axis=0), stderr, batch.failures())
    for row in rows:
        logger.info("P(tau <= %g) = %.3f +/- %.3f", row.horizon, row.probability, row.stderr)
    return study


@dataclass(frozen=True, slots=True, eq=False)
class GeneralCouplingStudy:
    runs: tuple[GeneralCouplingRun, ...]
    probabilities: tuple[HorizonProbability, ...]
    aborted: dict[int, str]

    def triangle_holds(self) -> bool:
        return all(run.triangle_holds() for run in self.runs)

    def probabilities_increase(self) -> bool:
        return _probabilities_increase(self.probabilities)

    def summary(self) -> dict[str, object]:
        return {
            "replicas": len(self.runs),
            "triangle_holds": self.triangle_holds(),
            "coupling_probability": {
                f"{row.horizon:g}": {"probability": row.probability, "stderr": row.stderr}
                for row in self.probabilities
            },
        }


def general_coupling_study(
    u0_a: Field,
    u0_b: Field,
    walls: WallPair,
    horizons: tuple[float, ...],
    p: PenalizedParams,
    cp: CouplingParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
    record_every: int = 1,
) -> GeneralCouplingStudy:
    T = max(horizons)
    logger.info("Coupling %d unordered replicas through the dominating process to T=%g", replicas, T)

    def task(replica_id: int) -> GeneralCouplingRun:
        return run_coupled_general(u0_a, u0_b, walls, T, p, SeedSpec(master_seed, replica_id), cp, record_every)

    batch = run_replicas(task, replicas, threads)
    runs = tuple(batch.values())
    if not runs:
        raise ReplicaAbortedError(batch.failures())
    rows = tuple(
        HorizonProbability(h, *proportion(sum(run.coupled_by(h) for run in runs), len(runs)))
        for h in sorted(horizons)
    )
    return GeneralCouplingStudy(runs, rows, batch.failures())


def tilt_round_trip(u0: Field, walls: WallPair, T: float, p: PenalizedParams, seeds: SeedSpec) -> float:
    """Sup distance between a noiseless run stepped in tilted coordinates and the plain run."""
    quiet = replace(p, sigma=Coefficient.constant(0.0))
    plain = run_reflected(u0, walls, T, quiet, seeds).path.values
    tilted = run_tilted(u0, walls, T, quiet, seeds, DriftTilt(p.L)).values
    return float(np.max(np.abs(plain - tilted)))


class CouplingService:
    """Coupling studies of one configured experiment."""

    def __init__(self, experiment: Experiment) -> None:
        self._experiment = experiment
        self._block = experiment.config.coupling
        self._params = experiment.coupling_params()
        if self._params.meeting_radius == 0.0:
            logger.warning("No meeting step: a finite mixing index alone cannot fuse the pair.")

    @property
    def params(self) -> CouplingParams:
        return self._params

    def pair(self) -> tuple[Field, Field]:
        return self._experiment.field(self._block.upper), self._experiment.field(self._block.lower)

    def ordered_study(self) -> CouplingStudy:
        experiment = self._experiment
        u0, v0 = self.pair()
        return coupling_study(
            u0,
            v0,
            experiment.walls,
            tuple(self._block.horizons),
            experiment.params,
            self._params,
            experiment.master_seed,
            experiment.replicas,
            experiment.threads,
            self._block.record_every,
        )

    def general_study(self) -> GeneralCouplingStudy:
        experiment = self._experiment
        u0_a, u0_b = self.pair()
        return general_coupling_study(
            u0_a,
            u0_b,
            experiment.walls,
            tuple(self._block.horizons),
            experiment.params,
            self._params,
            experiment.master_seed,
            experiment.replicas,
            experiment.threads,
            self._block.record_every,
        )

    def qv_report(self, study: CouplingStudy) -> QvReport:
        # Bracket ratios need every step; they are kept per step regardless of record_every.
        return qv_lower_bound_check(list(study.diagnostics), self._block.c0_estimate, self._block.u_threshold)

    def tilt_check(self) -> float:
        experiment = self._experiment
        u0, _ = self.pair()
        return tilt_round_trip(u0, experiment.walls, min(self._block.horizons), experiment.params, experiment.seeds(0))
