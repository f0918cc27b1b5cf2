"""Strong-Feller study and the derivative flow of the mollified dynamics."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import Field, WallPair
from wallspde.domain.mollified import (
    MollifiedCoefficients,
    derivative_flow,
    finite_difference_flow,
    run_mollified,
)
from wallspde.domain.observables import Observable, parse_observable
from wallspde.domain.reflected import PenalizedParams, iterate_steps, step_count
from wallspde.services.factories import Experiment
from wallspde.services.replica_runner import run_replicas

logger = logging.getLogger(__name__)

SIGN_TOLERANCE = 1e-12
# Sampled range for the penalty sign checks extends this far beyond the walls.
SIGN_MARGIN = 1.0


@dataclass(frozen=True, slots=True)
class FellerRow:
    t: float
    estimate_a: float
    estimate_b: float
    stderr: float
    ratio: float


@dataclass(frozen=True, slots=True, eq=False)
class StrongFellerReport:
    """R(t) = |E phi(u(t, g1)) - E phi(u(t, g2))| sqrt(t) / (sup|phi| |g1 - g2|_H)."""

    rows: tuple[FellerRow, ...]
    distance: float
    sup_bound: float
    replicas: int

    csv_header = ("t", "estimate_a", "estimate_b", "stderr", "ratio")

    def csv_rows(self):
        for row in self.rows:
            yield (row.t, row.estimate_a, row.estimate_b, row.stderr, row.ratio)

    def slope(self) -> tuple[float, float]:
        """Least-squares slope of log R against log t, with its delta-method standard error."""
        usable = [row for row in self.rows if row.ratio > 0.0]
        if len(usable) < 2:
            return 0.0, 0.0
        x = np.log([row.t for row in usable])
        y = np.log([row.ratio for row in usable])
        weights = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
        slope = float(np.dot(weights, y))
        # R is proportional to |difference|; its log has stderr se / |difference|.
        log_se = np.array([row.stderr / abs(row.estimate_a - row.estimate_b) for row in usable])
        return slope, float(math.sqrt(np.sum((weights * log_se) ** 2)))

    def bounded(self, slope_limit: float) -> bool:
        slope, stderr = self.slope()
        return slope <= slope_limit + stderr

    def summary(self) -> dict[str, object]:
        slope, stderr = self.slope()
        return {
            "replicas": self.replicas,
            "ratios": {f"{row.t:g}": row.ratio for row in self.rows},
            "max_ratio": max(row.ratio for row in self.rows),
            "slope": slope,
            "slope_stderr": stderr,
            "initial_distance": self.distance,
        }


def strong_feller_study(
    phi: Observable,
    g1: Field,
    g2: Field,
    walls: WallPair,
    t_list: tuple[float, ...],
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
) -> StrongFellerReport:
    """Estimate R(t) from independent chains: g1 on substream 0, g2 on substream 1."""
    if not phi.bounded or not phi.sup_bound:
        raise ValueError(f"Observable '{phi.name}' has no positive sup bound.")
    distance = g1.with_values(g1.values - g2.values).h_norm()
    if distance == 0.0:
        raise ValueError("g1 and g2 coincide; the ratio is undefined.")
    if replicas < 2:
        raise ValueError("strong_feller_study needs at least two replicas.")
    times = tuple(sorted(t_list))
    wanted = {step_count(t, p.dt): j for j, t in enumerate(times)}
    steps = max(wanted)

    def chain(u0: Field, seeds: SeedSpec) -> np.ndarray:
        values = np.zeros(len(times))
        for state in iterate_steps(u0, walls, p, seeds, steps):
            if state.index in wanted:
                values[wanted[state.index]] = phi(state.values)
        return values

    def task(replica_id: int) -> tuple[np.ndarray, np.ndarray]:
        seeds = SeedSpec(master_seed, replica_id)
        return chain(g1, seeds.with_substream(0)), chain(g2, seeds.with_substream(1))

    samples = run_replicas(task, replicas, threads).require_complete()
    a = np.stack([sample[0] for sample in samples])
    b = np.stack([sample[1] for sample in samples])
    n = a.shape[0]
    rows = []
    for j, t in enumerate(times):
        mean_a = float(np.mean(a[:, j]))
        mean_b = float(np.mean(b[:, j]))
        stderr = math.sqrt(float(np.var(a[:, j], ddof=1) + np.var(b[:, j], ddof=1)) / n)
        ratio = abs(mean_a - mean_b) * math.sqrt(t) / (phi.sup_bound * distance)
        rows.append(FellerRow(t, mean_a, mean_b, stderr, ratio))
    report = StrongFellerReport(tuple(rows), distance, float(phi.sup_bound), n)
    logger.info("Strong Feller study: max R %.4f, slope %.3f", report.summary()["max_ratio"], report.slope()[0])
    return report


@dataclass(frozen=True, slots=True, eq=False)
class DerivativeReport:
    times: np.ndarray
    mean_energy_ratio: np.ndarray
    halved_sup_ratio: float | None
    fd_relative_error: float
    max_dk: float
    min_dl: float
    replicas: int

    csv_header = ("t", "mean_energy_ratio")

    def csv_rows(self):
        for t, value in zip(self.times, self.mean_energy_ratio):
            yield (float(t), float(value))

    @property
    def sup_energy_ratio(self) -> float:
        return float(np.max(self.mean_energy_ratio))

    @property
    def signs_hold(self) -> bool:
        return self.max_dk <= SIGN_TOLERANCE and self.min_dl >= -SIGN_TOLERANCE

    def summary(self) -> dict[str, object]:
        return {
            "replicas": self.replicas,
            "sup_energy_ratio": self.sup_energy_ratio,
            "halved_sup_ratio": self.halved_sup_ratio,
            "fd_relative_error": self.fd_relative_error,
            "max_dk": self.max_dk,
            "min_dl": self.min_dl,
        }


def _mean_energy(
    u0: Field,
    direction: Field,
    mc: MollifiedCoefficients,
    epsilon: float,
    delta: float,
    T: float,
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None,
) -> tuple[np.ndarray, np.ndarray]:
    def task(replica_id: int) -> np.ndarray:
        flow = derivative_flow(u0, direction, mc, epsilon, delta, T, p, SeedSpec(master_seed, replica_id))
        return flow.energy_ratio()

    energies = np.stack(run_replicas(task, replicas, threads).require_complete())
    times = u0.time + p.dt * np.arange(energies.shape[1])
    return times, np.mean(energies, axis=0)


def derivative_report(
    u0: Field,
    direction: Field,
    mc: MollifiedCoefficients,
    epsilon: float,
    delta: float,
    T: float,
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
    fd_step: float = 1e-4,
) -> DerivativeReport:
    """
    Mean |X(t)|_H^2 / |direction|_H^2 over replicas, its sup after halving (epsilon, delta)
    when dt allows, the finite-difference error of replica 0 and the penalty sign checks.
    """
    times, energy = _mean_energy(u0, direction, mc, epsilon, delta, T, p, master_seed, replicas, threads)
    halved = None
    if p.dt <= 0.5 * min(epsilon, delta):
        _, finer = _mean_energy(u0, direction, mc, epsilon / 2, delta / 2, T, p, master_seed, replicas, threads)
        top = float(np.max(energy))
        halved = float(np.max(finer)) / top if top > 0.0 else None
    seeds = SeedSpec(master_seed, 0)
    base = run_mollified(u0, mc, epsilon, delta, T, p, seeds)
    flow = derivative_flow(u0, direction, mc, epsilon, delta, T, p, seeds, base=base)
    fd = finite_difference_flow(u0, direction, fd_step, mc, epsilon, delta, T, p, seeds)
    scale = float(np.max(np.abs(flow.path.values)))
    error = float(np.max(np.abs(fd.values - flow.path.values)))
    relative = error / scale if scale > 0.0 else error
    lo, hi = mc.walls.value_range()
    max_dk, min_dl = mc.sign_check(lo - SIGN_MARGIN, hi + SIGN_MARGIN)
    report = DerivativeReport(times, energy, halved, relative, max_dk, min_dl, replicas)
    logger.info("Derivative flow: sup energy ratio %.4f, FD error %.2e", report.sup_energy_ratio, relative)
    return report


class FellerService:
    """Strong-Feller ratio and derivative flow of one configured experiment."""

    def __init__(self, experiment: Experiment) -> None:
        self._experiment = experiment

    @property
    def observable(self) -> Observable:
        experiment = self._experiment
        return parse_observable(experiment.config.strong_feller.observable, experiment.grid)

    def ratio_study(self) -> StrongFellerReport:
        experiment = self._experiment
        block = experiment.config.strong_feller
        return strong_feller_study(
            self.observable,
            experiment.field(block.g1),
            experiment.field(block.g2),
            experiment.walls,
            tuple(block.t_list),
            experiment.params,
            experiment.master_seed,
            experiment.replicas,
            experiment.threads,
        )

    def derivative(self) -> DerivativeReport:
        experiment = self._experiment
        block = experiment.config.derivative
        mc = MollifiedCoefficients(block.n, experiment.params.drift, experiment.params.sigma, experiment.walls)
        return derivative_report(
            experiment.initial(),
            experiment.field(block.direction),
            mc,
            block.epsilon,
            block.delta,
            block.T,
            experiment.params,
            experiment.master_seed,
            experiment.replicas,
            experiment.threads,
            block.fd_step,
        )
