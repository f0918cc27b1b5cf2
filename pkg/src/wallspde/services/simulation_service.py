"""Reflected runs and their structural checks: sandwich bounds, penalization sweep, weak form."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from wallspde.core.errors import SeedMismatchError
from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import CircleGrid, Field, FieldPath, WallPair
from wallspde.domain.heat_kernel import stochastic_convolution
from wallspde.domain.reflected import PenalizedParams, TrajectoryRecord, run_reflected
from wallspde.services.replica_runner import ReplicaBatch, run_replicas

logger = logging.getLogger(__name__)

ORDER_TOLERANCE = 1e-8
TEST_FUNCTIONS = ("1", "cos1", "sin1", "cos2")


def discretization_tolerance(dt: float) -> float:
    return 5.0 * math.sqrt(dt)


def simulate(
    u0: Field, walls: WallPair, T: float, p: PenalizedParams, seeds: SeedSpec, record_every: int = 1
) -> TrajectoryRecord:
    logger.debug("run_reflected scheme=%s dt=%g T=%g replica=%d", p.scheme, p.dt, T, seeds.replica_id)
    return run_reflected(u0, walls, T, p, seeds, record_every)


@dataclass(frozen=True, slots=True, eq=False)
class SandwichReport:
    """Pathwise bounds v - phi_bar <= u <= v + psi along one penalized run."""

    times: np.ndarray
    phi_bar: np.ndarray
    psi: np.ndarray
    lower_violation: float
    upper_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.lower_violation, self.upper_violation) <= self.tolerance

    def summary(self) -> dict[str, object]:
        return {
            "lower_violation": self.lower_violation,
            "upper_violation": self.upper_violation,
            "tolerance": self.tolerance,
            "phi_bar_final": float(self.phi_bar[-1]),
            "psi_final": float(self.psi[-1]),
        }


def sandwich_check(record: TrajectoryRecord, seeds: SeedSpec) -> SandwichReport:
    """
    Re-simulate the unpenalized v_{k+1} = S(v_k + dt f(u_k) + sigma(u_k) dW_k / dx), v_0 = u_0,
    on the record's noise with the recorded u frozen, and measure both sandwich bounds.
    """
    if record.params.scheme != "penalized":
        raise ValueError("sandwich_check needs a record of the penalized scheme.")
    if record.record_every != 1:
        raise ValueError("sandwich_check needs every step recorded (record_every = 1).")
    if seeds != record.seeds:
        raise SeedMismatchError("sandwich_check must replay the record's own noise stream.")
    p = record.params
    grid = record.grid
    heat = p.heat(grid)
    noise = p.noise(grid, seeds)
    u = record.path.values
    lower = record.walls.lower.values
    upper = record.walls.upper.values
    v = np.array(u[0])
    phi_bar = np.zeros(len(u))
    psi = np.zeros(len(u))
    lower_violation = upper_violation = 0.0
    running_phi = running_psi = 0.0
    for k in range(len(u)):
        if k > 0:
            previous = u[k - 1]
            v = heat.apply(v + p.dt * p.drift(previous) + p.sigma(previous) * noise.increment(k - 1).density())
        running_phi = max(running_phi, float(np.max(np.maximum(v - upper, 0.0))))
        running_psi = max(running_psi, float(np.max(np.maximum(lower - v, 0.0))))
        phi_bar[k] = running_phi
        psi[k] = running_psi
        lower_violation = max(lower_violation, float(np.max(v - running_phi - u[k])))
        upper_violation = max(upper_violation, float(np.max(u[k] - v - running_psi)))
    return SandwichReport(
        times=record.times,
        phi_bar=phi_bar,
        psi=psi,
        lower_violation=max(lower_violation, 0.0),
        upper_violation=max(upper_violation, 0.0),
        tolerance=discretization_tolerance(p.dt),
    )


@dataclass(frozen=True, slots=True)
class SweepLevel:
    level: int
    epsilon: float
    delta: float
    sup_distance: float


@dataclass(frozen=True, slots=True, eq=False)
class SweepReport:
    """Penalized-to-projected distances over halving penalties and the family orientations."""

    levels: tuple[SweepLevel, ...]
    tolerance: float
    slack: float
    delta_orientation: str
    epsilon_orientation: str

    csv_header = ("level", "epsilon", "delta", "sup_distance")

    def csv_rows(self):
        for level in self.levels:
            yield (level.level, level.epsilon, level.delta, level.sup_distance)

    @property
    def distances(self) -> list[float]:
        return [level.sup_distance for level in self.levels]

    @property
    def nonincreasing(self) -> bool:
        d = self.distances
        return all(d[j + 1] <= d[j] * (1.0 + self.slack) + 1e-15 for j in range(len(d) - 1))

    @property
    def passed(self) -> bool:
        return self.nonincreasing and self.distances[-1] <= self.tolerance

    def summary(self) -> dict[str, object]:
        return {
            "distances": self.distances,
            "nonincreasing": self.nonincreasing,
            "final_distance": self.distances[-1],
            "tolerance": self.tolerance,
            "delta_orientation": self.delta_orientation,
            "epsilon_orientation": self.epsilon_orientation,
        }


def family_orientation(paths: list[np.ndarray], tol: float = ORDER_TOLERANCE) -> str:
    """
    Orientation of a family ordered by decreasing penalty parameter:
    `increasing` when each path dominates its predecessor, `decreasing` for the reverse,
    `constant` when both hold, `none` otherwise.
    """
    up = all(np.min(b - a) >= -tol for a, b in zip(paths, paths[1:]))
    down = all(np.max(b - a) <= tol for a, b in zip(paths, paths[1:]))
    if up and down:
        return "constant"
    if up:
        return "increasing"
    if down:
        return "decreasing"
    return "none"


def convergence_sweep(
    u0: Field,
    walls: WallPair,
    T: float,
    base_params: PenalizedParams,
    levels: int,
    seeds: SeedSpec,
    tolerance: float = 0.05,
    slack: float = 0.1,
) -> SweepReport:
    """
    Halve (epsilon, delta) from the base params `levels` times on one frozen noise path,
    measuring the sup distance of each penalized run to the projected run.

    The delta- and epsilon-families are rerun with the implicit propagator, under which
    the penalized map is order preserving, to record their pathwise orientation.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1.")
    projected = run_reflected(u0, walls, T, base_params.with_scheme("projected"), seeds).path.values
    penalized = base_params.with_scheme("penalized")
    rows = []
    for j in range(levels):
        epsilon = base_params.epsilon * 2.0**-j
        delta = base_params.delta * 2.0**-j
        path = run_reflected(u0, walls, T, penalized.with_penalty(epsilon, delta), seeds).path.values
        rows.append(SweepLevel(j, epsilon, delta, float(np.max(np.abs(path - projected)))))
        logger.debug("sweep level %d: D=%.4e", j, rows[-1].sup_distance)
    ordered = replace(penalized, propagator="implicit")
    delta_family = [
        run_reflected(u0, walls, T, ordered.with_penalty(base_params.epsilon, base_params.delta * 2.0**-j), seeds)
        .path.values
        for j in range(levels)
    ]
    epsilon_family = [
        run_reflected(u0, walls, T, ordered.with_penalty(base_params.epsilon * 2.0**-j, base_params.delta), seeds)
        .path.values
        for j in range(levels)
    ]
    report = SweepReport(
        levels=tuple(rows),
        tolerance=tolerance,
        slack=slack,
        delta_orientation=family_orientation(delta_family),
        epsilon_orientation=family_orientation(epsilon_family),
    )
    logger.info(
        "Penalization sweep: final D=%.4e, delta family %s, epsilon family %s",
        report.distances[-1],
        report.delta_orientation,
        report.epsilon_orientation,
    )
    return report


def nodal_test_function(name: str, grid: CircleGrid) -> tuple[np.ndarray, np.ndarray]:
    """(phi, phi'') at the nodes for one of 1, cos<m>, sin<m>."""
    x = grid.nodes
    if name == "1":
        return np.ones_like(x), np.zeros_like(x)
    kind, m_text = name[:3], name[3:]
    if kind not in ("cos", "sin") or not m_text.isdigit():
        raise ValueError(f"Unknown test function '{name}'.")
    m = int(m_text)
    if not 0 < m < grid.n_x // 2:
        raise ValueError(f"Test function '{name}' is not resolved by n_x={grid.n_x}.")
    phi = np.cos(m * x) if kind == "cos" else np.sin(m * x)
    return phi, -(m**2) * phi


def weak_form_residual(record: TrajectoryRecord, phi: str) -> float:
    """
    max over t_k of |(u_k, phi) - (u_0, phi) - sum dt (u, phi'') - sum dt (f(u), phi)
    - sum phi sigma(u) dW - sum phi d eta + sum phi d xi| with left-point sums.
    """
    if record.record_every != 1:
        raise ValueError("weak_form_residual needs every step recorded (record_every = 1).")
    grid = record.grid
    p = record.params
    dx = grid.dx
    values, second = nodal_test_function(phi, grid)
    noise = p.noise(grid, record.seeds)
    u = record.path.values
    eta = record.measures.eta
    xi = record.measures.xi
    start = float(np.dot(u[0], values)) * dx
    accumulated = 0.0
    worst = 0.0
    for k in range(len(u) - 1):
        accumulated += p.dt * float(np.dot(u[k], second)) * dx
        accumulated += p.dt * float(np.dot(p.drift(u[k]), values)) * dx
        accumulated += float(np.dot(values * p.sigma(u[k]), noise.increment(k).values))
        accumulated += float(np.dot(values, eta[k + 1] - xi[k + 1]))
        residual = float(np.dot(u[k + 1], values)) * dx - start - accumulated
        worst = max(worst, abs(residual))
    return worst


@dataclass(frozen=True, slots=True, eq=False)
class WeakFormStudy:
    """Residuals per test function at dt, dt/2, ... on one shared Brownian sheet."""

    dts: tuple[float, ...]
    residuals: dict[str, tuple[float, ...]]

    csv_header = ("phi", "dt", "residual")

    def csv_rows(self):
        for name, values in self.residuals.items():
            for dt, value in zip(self.dts, values):
                yield (name, dt, value)

    def ratios(self, name: str) -> list[float]:
        values = self.residuals[name]
        return [values[j] / values[j + 1] if values[j + 1] > 0.0 else math.inf for j in range(len(values) - 1)]

    def passed(self, low: float = 1.7, high: float = 2.3, constant_tol: float = 1e-10) -> bool:
        for name, values in self.residuals.items():
            if name == "1":
                if max(values) > constant_tol:
                    return False
            elif not all(low <= ratio <= high for ratio in self.ratios(name)):
                return False
        return True

    def summary(self) -> dict[str, object]:
        return {
            "dts": list(self.dts),
            "residuals": {name: list(values) for name, values in self.residuals.items()},
            "ratios": {name: self.ratios(name) for name in self.residuals if name != "1"},
        }


def weak_form_study(
    u0: Field,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
    halvings: int = 1,
    phis: tuple[str, ...] = TEST_FUNCTIONS,
) -> WeakFormStudy:
    """Run at dt / 2**j for j = 0..halvings, refining the noise so every run sees the same sheet."""
    if halvings < 1:
        raise ValueError("halvings must be >= 1.")
    dts = []
    residuals: dict[str, list[float]] = {name: [] for name in phis}
    for j in range(halvings + 1):
        level = replace(p, dt=p.dt * 2.0**-j, noise_refinement=p.noise_refinement + halvings - j)
        record = run_reflected(u0, walls, T, level, seeds)
        dts.append(level.dt)
        for name in phis:
            residuals[name].append(weak_form_residual(record, name))
    return WeakFormStudy(tuple(dts), {name: tuple(values) for name, values in residuals.items()})


def unreflected_reference(record: TrajectoryRecord) -> FieldPath:
    """Heat flow of u_0 plus the stochastic convolution of the record's own drift and noise."""
    if record.record_every != 1:
        raise ValueError("unreflected_reference needs every step recorded (record_every = 1).")
    p = record.params
    grid = record.grid
    u = record.path.values
    steps = len(u) - 1
    noise = p.noise(grid, record.seeds)
    drift_path = FieldPath(grid, record.times, p.drift(u))
    sigma_path = FieldPath(grid, record.times, p.sigma(u))
    increments = [noise.increment(k) for k in range(steps)]
    convolution = stochastic_convolution(drift_path, sigma_path, increments, record.times, p.propagator)
    flow = np.stack([p.heat(grid).apply(u[0], steps=k) for k in range(steps + 1)])
    return FieldPath(grid, record.times, flow + convolution.values)


@dataclass(frozen=True, slots=True)
class MomentReport:
    """max_t sup|u| per replica against the walls' magnitude."""

    sup_norms: tuple[float, ...]
    bound: float
    aborted: dict[int, str]

    @property
    def passed(self) -> bool:
        return not self.aborted and all(value <= self.bound + 1e-12 for value in self.sup_norms)

    def summary(self) -> dict[str, object]:
        norms = np.array(self.sup_norms) if self.sup_norms else np.zeros(1)
        return {
            "replicas": len(self.sup_norms),
            "max_sup_norm": float(np.max(norms)),
            "mean_sup_norm": float(np.mean(norms)),
            "bound": self.bound,
        }


def moment_bound_check(
    u0: Field,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    master_seed: int,
    replicas: int,
    threads: int | None = None,
    record_every: int = 1,
) -> MomentReport:
    def task(replica_id: int) -> float:
        record = run_reflected(u0, walls, T, p, SeedSpec(master_seed, replica_id), record_every)
        return float(np.max(np.abs(record.path.values)))

    batch: ReplicaBatch[float] = run_replicas(task, replicas, threads)
    return MomentReport(tuple(batch.values()), walls.magnitude(), batch.failures())
