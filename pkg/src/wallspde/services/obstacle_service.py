"""Obstacle-map checks: Lipschitz factor over random forcing pairs and the composition check."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from wallspde.core.rng import SeedSpec
from wallspde.core.types import PropagatorName
from wallspde.domain.circle import CircleGrid, Field, FieldPath, WallPair
from wallspde.domain.heat_kernel import stochastic_convolution
from wallspde.domain.noise import NoiseStream
from wallspde.domain.obstacle import ObstacleProblem, composition_tolerance, lipschitz_ratio, solve_obstacle
from wallspde.domain.reflected import PenalizedParams, run_reflected, step_count
from wallspde.services.factories import Experiment
from wallspde.services.replica_runner import run_replicas

logger = logging.getLogger(__name__)

LIPSCHITZ_SLACK = 1e-6
# Adversarial pairs scale the forcing up so both walls clip heavily.
ADVERSARIAL_SCALE = 2.0
# Substep levels of the sheet the composition check rebuilds its forcing on.
FORCING_REFINEMENT = 3


def random_forcing(grid: CircleGrid, dt: float, window: float, amplitude: float, seeds: SeedSpec) -> FieldPath:
    """A smoothed-noise forcing path: the stochastic convolution of amplitude * W, starting at 0."""
    steps = step_count(window, dt)
    times = dt * np.arange(steps + 1)
    noise = NoiseStream(grid, dt, seeds)
    zeros = FieldPath(grid, times, np.zeros((steps + 1, grid.n_x)))
    sigma = FieldPath(grid, times, np.full((steps + 1, grid.n_x), float(amplitude)))
    return stochastic_convolution(zeros, sigma, [noise.increment(k) for k in range(steps)], times)


@dataclass(frozen=True, slots=True)
class PairRatio:
    pair: int
    kind: str
    ratio: float


@dataclass(frozen=True, slots=True, eq=False)
class LipschitzReport:
    ratios: tuple[PairRatio, ...]
    bound: float

    csv_header = ("pair", "kind", "ratio")

    def csv_rows(self):
        for row in self.ratios:
            yield (row.pair, row.kind, row.ratio)

    @property
    def max_ratio(self) -> float:
        return max(row.ratio for row in self.ratios)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound + LIPSCHITZ_SLACK

    def summary(self) -> dict[str, object]:
        by_kind: dict[str, float] = {}
        for row in self.ratios:
            by_kind[row.kind] = max(by_kind.get(row.kind, 0.0), row.ratio)
        return {"pairs": len(self.ratios), "max_ratio": self.max_ratio, "max_by_kind": by_kind, "bound": self.bound}


def lipschitz_study(
    g: Field,
    walls: WallPair,
    dt: float,
    pairs: int,
    master_seed: int,
    window: float = 1.0,
    amplitude: float = 3.0,
    bound: float = 2.0,
    propagator: PropagatorName = "implicit",
    threads: int | None = None,
) -> LipschitzReport:
    """
    `pairs` independent forcing pairs plus one adversarial pair (v, -v) per ten,
    each measured for the sup-norm ratio of the obstacle map.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1.")
    adversarial = max(1, pairs // 10)
    grid = g.grid

    def task(index: int) -> PairRatio:
        seeds = SeedSpec(master_seed, index, "AUX")
        if index < pairs:
            v1 = random_forcing(grid, dt, window, amplitude, seeds)
            v2 = random_forcing(grid, dt, window, amplitude, seeds.with_substream(1))
            kind = "independent"
        else:
            v1 = random_forcing(grid, dt, window, ADVERSARIAL_SCALE * amplitude, seeds)
            v2 = FieldPath(grid, v1.times, -v1.values)
            kind = "adversarial"
        return PairRatio(index, kind, lipschitz_ratio(v1, v2, g, walls, window, propagator))

    batch = run_replicas(task, pairs + adversarial, threads)
    report = LipschitzReport(tuple(batch.require_complete()), bound)
    logger.info("Obstacle map: %d pairs, max ratio %.4f (bound %g)", len(report.ratios), report.max_ratio, bound)
    return report


@dataclass(frozen=True, slots=True)
class CompositionReport:
    discrepancy: float
    tolerance: float
    max_violation: float

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance

    def summary(self) -> dict[str, object]:
        return {
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "max_wall_violation": self.max_violation,
        }


def rebuild_forcing(u: FieldPath, p: PenalizedParams, seeds: SeedSpec, refinement: int = 0) -> FieldPath:
    """
    Forcing of a realized path, v_0 = 0, sampled back on the path's times.

    Every step of u splits into 2**refinement substeps v <- S_h(v + h f(u_k) + sigma(u_k) dW / dx)
    with u_k held over the step. The substeps read the sheet of a run at p.dt with
    p.noise_refinement + refinement levels: refinement 0 repeats that run's own convolution,
    larger values approach the mild integral of the same noise.
    """
    if refinement < 0:
        raise ValueError("refinement must be >= 0.")
    grid = u.grid
    parts = 2**refinement
    fine = replace(p, dt=p.dt / parts)
    noise = fine.noise(grid, seeds)
    steps = (len(u) - 1) * parts
    times = u.times[0] + fine.dt * np.arange(steps + 1)
    held = np.repeat(u.values[:-1], parts, axis=0)
    drift = FieldPath(grid, times[:-1], p.drift(held))
    sigma = FieldPath(grid, times[:-1], p.sigma(held))
    increments = [noise.increment(k) for k in range(steps)]
    path = stochastic_convolution(drift, sigma, increments, times, p.propagator)
    return FieldPath(grid, u.times, path.values[::parts])


def continuity_composition_check(
    g: Field,
    seeds: SeedSpec,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    refinement: int = FORCING_REFINEMENT,
) -> CompositionReport:
    """
    Projected run against the obstacle map applied to the forcing rebuilt from that run
    on a sheet `refinement` levels finer than the run steps.
    """
    projected = replace(p.with_scheme("projected"), noise_refinement=p.noise_refinement + refinement)
    record = run_reflected(g, walls, T, projected, seeds)
    forcing = rebuild_forcing(record.path, p, seeds, refinement)
    solution = solve_obstacle(ObstacleProblem(forcing, g, walls, projected.propagator))
    discrepancy = float(np.max(np.abs(solution.path.values - record.path.values)))
    report = CompositionReport(discrepancy, composition_tolerance(p.dt), record.max_violation)
    logger.info("Composition check: discrepancy %.3e (tolerance %.3e)", discrepancy, report.tolerance)
    return report


def composition_refinement(
    g: Field, seeds: SeedSpec, walls: WallPair, T: float, p: PenalizedParams
) -> tuple[float, float, float]:
    """
    Sup distance of the projected run at dt and dt/2 to the run at dt/4 on one shared sheet,
    and their ratio.
    """
    levels = []
    for j in range(3):
        level = replace(
            p.with_scheme("projected"), dt=p.dt * 2.0**-j, noise_refinement=p.noise_refinement + 2 - j
        )
        levels.append(run_reflected(g, walls, T, level, seeds).path.values)
    finest = levels[2]
    coarse = float(np.max(np.abs(levels[0] - finest[::4])))
    middle = float(np.max(np.abs(levels[1][::2] - finest[::4])))
    return coarse, middle, coarse / middle if middle > 0.0 else math.inf


class ObstacleService:
    """Obstacle-map checks of one configured experiment."""

    def __init__(self, experiment: Experiment) -> None:
        self._experiment = experiment
        self._block = experiment.config.obstacle

    def lipschitz(self) -> LipschitzReport:
        experiment = self._experiment
        block = self._block
        return lipschitz_study(
            experiment.initial(),
            experiment.walls,
            experiment.config.time.dt,
            block.pairs,
            experiment.master_seed,
            window=block.window,
            amplitude=block.amplitude,
            bound=block.bound,
            threads=experiment.threads,
        )

    def composition(self) -> CompositionReport:
        experiment = self._experiment
        return continuity_composition_check(
            experiment.initial(), experiment.seeds(0), experiment.walls, experiment.config.time.T, experiment.params
        )
