"""Penalized and projected time stepping for the heat equation between two walls."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from wallspde.core.errors import NumericalBlowUpError, WallViolationError
from wallspde.core.rng import SeedSpec
from wallspde.core.types import PropagatorName, SchemeName
from wallspde.domain.circle import CircleGrid, Field, FieldPath, WallPair
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.heat_kernel import HeatPropagator
from wallspde.domain.noise import NoiseIncrement, NoiseStream

WALL_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class PenalizedParams:
    """Step size, penalty strengths, coefficients and scheme of one run."""

    epsilon: float
    delta: float
    dt: float
    drift: Coefficient
    sigma: Coefficient
    scheme: SchemeName = "projected"
    propagator: PropagatorName = "exponential"
    noise_refinement: int = 0
    lipschitz: float | None = None

    def __post_init__(self) -> None:
        for name in ("epsilon", "delta", "dt"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number.")
        if self.scheme not in ("penalized", "projected"):
            raise ValueError(f"Unknown scheme '{self.scheme}'.")
        if self.noise_refinement < 0:
            raise ValueError("noise_refinement must be >= 0.")
        if self.lipschitz is not None:
            if self.lipschitz < 0.0:
                raise ValueError("lipschitz must be >= 0.")
            worst = max(self.drift.lipschitz, self.sigma.lipschitz)
            if worst > self.lipschitz + 1e-12:
                raise ValueError(
                    f"Coefficient Lipschitz constant {worst} exceeds the declared L={self.lipschitz}."
                )

    @property
    def L(self) -> float:
        if self.lipschitz is not None:
            return self.lipschitz
        return max(self.drift.lipschitz, self.sigma.lipschitz)

    def check_lipschitz(self, lo: float, hi: float, tol: float = 1e-9) -> bool:
        """Both coefficients pass the sampled Lipschitz check with constant L on [lo, hi]."""
        return self.drift.check_lipschitz(lo, hi, self.L, tol) and self.sigma.check_lipschitz(
            lo, hi, self.L, tol
        )

    def with_penalty(self, epsilon: float, delta: float) -> PenalizedParams:
        return replace(self, epsilon=epsilon, delta=delta)

    def with_scheme(self, scheme: SchemeName) -> PenalizedParams:
        return replace(self, scheme=scheme)

    def heat(self, grid: CircleGrid) -> HeatPropagator:
        return HeatPropagator(grid, self.dt, self.propagator)

    def noise(self, grid: CircleGrid, seeds: SeedSpec) -> NoiseStream:
        silent = self.sigma.is_constant and self.sigma.offset == 0.0
        return NoiseStream(grid, self.dt, seeds, self.noise_refinement, silent)

    def to_payload(self) -> dict[str, object]:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "dt": self.dt,
            "drift": self.drift.to_payload(),
            "sigma": self.sigma.to_payload(),
            "scheme": self.scheme,
            "propagator": self.propagator,
            "noise_refinement": self.noise_refinement,
            "lipschitz": self.L,
        }


@dataclass(frozen=True, slots=True)
class StepResult:
    """Nodal values after one step and the reflection masses it produced."""

    values: np.ndarray
    eta: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True, slots=True, eq=False)
class ReflectionMeasures:
    """Cell masses eta (lower wall) and xi (upper wall); row k covers (t_{k-1}, t_k]."""

    eta: np.ndarray
    xi: np.ndarray

    def __post_init__(self) -> None:
        eta = np.array(self.eta, dtype=float)
        xi = np.array(self.xi, dtype=float)
        if eta.shape != xi.shape or eta.ndim != 2:
            raise ValueError("eta and xi must be 2-D arrays of the same shape.")
        if np.any(eta < 0.0) or np.any(xi < 0.0):
            raise ValueError("Reflection masses must be nonnegative.")
        eta.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "xi", xi)

    def total_eta(self) -> float:
        return float(self.eta.sum())

    def total_xi(self) -> float:
        return float(self.xi.sum())


@dataclass(frozen=True, slots=True, eq=False)
class TrajectoryRecord:
    """A recorded run: path, measures, and everything needed to replay its noise."""

    path: FieldPath
    measures: ReflectionMeasures
    walls: WallPair
    params: PenalizedParams
    seeds: SeedSpec
    record_every: int
    complementarity: tuple[float, float]
    max_violation: float

    @property
    def times(self) -> np.ndarray:
        return self.path.times

    @property
    def grid(self) -> CircleGrid:
        return self.path.grid

    csv_header = ("t", "node", "u", "eta_mass", "xi_mass")

    def csv_rows(self) -> Iterator[tuple[float, int, float, float, float]]:
        for k, t in enumerate(self.path.times):
            for i in range(self.grid.n_x):
                yield (
                    float(t),
                    i,
                    float(self.path.values[k, i]),
                    float(self.measures.eta[k, i]),
                    float(self.measures.xi[k, i]),
                )

    def summary(self) -> dict[str, object]:
        return {
            "steps": int(round(self.path.times[-1] / self.params.dt)),
            "records": len(self.path),
            "total_eta": self.measures.total_eta(),
            "total_xi": self.measures.total_xi(),
            "complementarity_lower": self.complementarity[0],
            "complementarity_upper": self.complementarity[1],
            "max_wall_violation": self.max_violation,
            "sup_norm": float(np.max(np.abs(self.path.values))),
        }


def free_values(
    values: np.ndarray, heat: HeatPropagator, noise_cells: np.ndarray, p: PenalizedParams
) -> np.ndarray:
    """u* = S_dt(u + dt f(u) + noise / dx), where `noise_cells` holds sigma-weighted cell masses."""
    return heat.apply(values + p.dt * p.drift(values) + noise_cells / heat.grid.dx)


def penalty_substep(
    u_star: np.ndarray, walls: WallPair, dt: float, epsilon: float, delta: float
) -> StepResult:
    """Exact nodewise solve of u' = u* + dt[(u'-h1)^-/delta - (u'-h2)^+/epsilon]."""
    lower = walls.lower.values
    upper = walls.upper.values
    a = dt / delta
    b = dt / epsilon
    values = np.where(
        u_star < lower,
        (u_star + a * lower) / (1.0 + a),
        np.where(u_star > upper, (u_star + b * upper) / (1.0 + b), u_star),
    )
    dx = walls.grid.dx
    eta = a * np.maximum(lower - values, 0.0) * dx
    xi = b * np.maximum(values - upper, 0.0) * dx
    return StepResult(values, eta, xi)


def projection_substep(u_star: np.ndarray, walls: WallPair) -> StepResult:
    """Clip onto [h1, h2]; the clipped amounts times dx are the reflection masses."""
    lower = walls.lower.values
    upper = walls.upper.values
    dx = walls.grid.dx
    eta = np.maximum(lower - u_star, 0.0) * dx
    xi = np.maximum(u_star - upper, 0.0) * dx
    return StepResult(np.clip(u_star, lower, upper), eta, xi)


def advance(
    values: np.ndarray,
    walls: WallPair,
    heat: HeatPropagator,
    noise_cells: np.ndarray,
    p: PenalizedParams,
) -> StepResult:
    u_star = free_values(values, heat, noise_cells, p)
    if p.scheme == "penalized":
        result = penalty_substep(u_star, walls, p.dt, p.epsilon, p.delta)
    else:
        result = projection_substep(u_star, walls)
    if not np.all(np.isfinite(result.values)):
        raise NumericalBlowUpError("Time step produced non-finite values.")
    return result


def step_penalized(
    u: Field, walls: WallPair, dW: NoiseIncrement, p: PenalizedParams, heat: HeatPropagator | None = None
) -> Field:
    """One splitting step: free heat step, then the exact penalty substep."""
    if p.scheme != "penalized":
        raise ValueError("step_penalized needs scheme='penalized'.")
    heat = heat or p.heat(u.grid)
    result = advance(u.values, walls, heat, p.sigma(u.values) * dW.values, p)
    return Field(u.grid, result.values, u.time + p.dt)


def step_projected(
    u: Field, walls: WallPair, dW: NoiseIncrement, p: PenalizedParams, heat: HeatPropagator | None = None
) -> tuple[Field, np.ndarray, np.ndarray]:
    """One free step followed by clipping; returns the new field and the (eta, xi) slices."""
    if not walls.contains(u, WALL_TOLERANCE):
        raise WallViolationError(
            f"Input leaves the walls by {walls.violation(u.values):.3e} before a projected step."
        )
    heat = heat or p.heat(u.grid)
    result = advance(u.values, walls, heat, p.sigma(u.values) * dW.values, p.with_scheme("projected"))
    return Field(u.grid, result.values, u.time + p.dt), result.eta, result.xi


@dataclass(frozen=True, slots=True)
class StepState:
    """Solver state after `index` steps, with the masses of the last step."""

    index: int
    time: float
    values: np.ndarray
    eta: np.ndarray
    xi: np.ndarray


def step_count(T: float, dt: float) -> int:
    if not T > 0.0:
        raise ValueError("T must be > 0.")
    steps = int(round(T / dt))
    if steps < 1:
        raise ValueError(f"T={T} is shorter than one step of dt={dt}.")
    return steps


def require_initial(u0: Field, walls: WallPair) -> None:
    if not walls.contains(u0, WALL_TOLERANCE):
        raise WallViolationError(
            f"Initial data leaves the walls by {walls.violation(u0.values):.3e}."
        )


def iterate_steps(
    u0: Field,
    walls: WallPair,
    p: PenalizedParams,
    seeds: SeedSpec,
    steps: int,
) -> Iterator[StepState]:
    """Yield the state after each of `steps` steps without storing the trajectory."""
    require_initial(u0, walls)
    heat = p.heat(u0.grid)
    noise = p.noise(u0.grid, seeds)
    values = np.array(u0.values)
    for k in range(steps):
        dW = noise.increment(k)
        result = advance(values, walls, heat, p.sigma(values) * dW.values, p)
        values = result.values
        yield StepState(k + 1, u0.time + (k + 1) * p.dt, values, result.eta, result.xi)


def run_reflected(
    u0: Field,
    walls: WallPair,
    T: float,
    p: PenalizedParams,
    seeds: SeedSpec,
    record_every: int = 1,
) -> TrajectoryRecord:
    """
    Simulate on t_k = k*dt up to T, keeping every `record_every`-th state and the final one.

    Reflection masses are summed over each recording window; a trailing partial
    window closes at T. Complementarity residuals sum |(u - h1) eta| and
    |(h2 - u) xi| over every step.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1.")
    steps = step_count(T, p.dt)
    n_x = u0.grid.n_x
    n_records = -(-steps // record_every) + 1
    times = np.empty(n_records)
    values = np.empty((n_records, n_x))
    eta = np.zeros((n_records, n_x))
    xi = np.zeros((n_records, n_x))
    times[0] = u0.time
    values[0] = u0.values
    window_eta = np.zeros(n_x)
    window_xi = np.zeros(n_x)
    lower_residual = 0.0
    upper_residual = 0.0
    violation = 0.0
    row = 0
    for state in iterate_steps(u0, walls, p, seeds, steps):
        window_eta += state.eta
        window_xi += state.xi
        lower_residual += float(np.abs(np.dot(state.values - walls.lower.values, state.eta)))
        upper_residual += float(np.abs(np.dot(walls.upper.values - state.values, state.xi)))
        violation = max(violation, walls.violation(state.values))
        if state.index % record_every == 0 or state.index == steps:
            row += 1
            times[row] = state.time
            values[row] = state.values
            eta[row] = window_eta
            xi[row] = window_xi
            window_eta = np.zeros(n_x)
            window_xi = np.zeros(n_x)
    return TrajectoryRecord(
        path=FieldPath(u0.grid, times[: row + 1], values[: row + 1]),
        measures=ReflectionMeasures(eta[: row + 1], xi[: row + 1]),
        walls=walls,
        params=p,
        seeds=seeds,
        record_every=record_every,
        complementarity=(lower_residual, upper_residual),
        max_violation=violation,
    )
