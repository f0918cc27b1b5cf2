"""Discrete double-obstacle map: forcing path and initial datum to the constrained path."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wallspde.core.errors import GridMismatchError, WallViolationError
from wallspde.core.types import PropagatorName
from wallspde.domain.circle import Field, FieldPath, PathLike, WallPair, as_path
from wallspde.domain.heat_kernel import HeatPropagator, apply_semigroup
from wallspde.domain.reflected import WALL_TOLERANCE, ReflectionMeasures, StepResult, projection_substep

FORCING_START_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True, eq=False)
class ObstacleProblem:
    """
    Forcing path v on a uniform time mesh with v(t_0) = 0, initial datum g and walls.

    The heat step defaults to the implicit propagator, whose kernel is positive,
    so the map is order preserving and 1-Lipschitz in the forcing increments.
    """

    forcing: FieldPath
    initial: Field
    walls: WallPair
    propagator: PropagatorName = "implicit"

    def __post_init__(self) -> None:
        forcing = as_path(self.forcing)
        object.__setattr__(self, "forcing", forcing)
        if forcing.grid != self.walls.grid or self.initial.grid != self.walls.grid:
            raise GridMismatchError("Forcing, initial datum and walls must share one grid.")
        if len(forcing) < 2:
            raise ValueError("The forcing path needs at least two times.")
        steps = np.diff(forcing.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15) or not steps[0] > 0.0:
            raise ValueError("The forcing path must use a uniform positive time step.")
        if np.max(np.abs(forcing.values[0])) > FORCING_START_TOLERANCE:
            raise ValueError("The forcing path must start at 0.")
        if not self.walls.contains(self.initial, WALL_TOLERANCE):
            raise WallViolationError(
                f"Initial datum leaves the walls by {self.walls.violation(self.initial.values):.3e}."
            )

    @property
    def dt(self) -> float:
        return float(self.forcing.times[1] - self.forcing.times[0])

    @property
    def dx(self) -> float:
        return self.walls.grid.dx

    def heat(self) -> HeatPropagator:
        return HeatPropagator(self.walls.grid, self.dt, self.propagator)


@dataclass(frozen=True, slots=True, eq=False)
class ObstacleSolution:
    path: FieldPath
    measures: ReflectionMeasures
    problem: ObstacleProblem

    def ubar(self) -> FieldPath:
        """Derived view u(t) - S_t g, with S_t the exact heat semigroup."""
        g = self.problem.initial
        origin = self.path.times[0]
        flows = np.stack([apply_semigroup(g, float(t - origin)).values for t in self.path.times])
        return FieldPath(self.path.grid, self.path.times, self.path.values - flows)

    def complementarity(self) -> float:
        """sum (u - h1) eta + sum (h2 - u) xi over all cells and steps."""
        lower = self.problem.walls.lower.values
        upper = self.problem.walls.upper.values
        values = self.path.values
        return float(
            np.sum((values - lower) * self.measures.eta) + np.sum((upper - values) * self.measures.xi)
        )


def solve_obstacle(prob: ObstacleProblem, released: tuple[int, int] | None = None) -> ObstacleSolution:
    """
    u_0 = g, u_{k+1} = clip(S u_k + v_{k+1} - S v_k, h1, h2).

    `released = (k, i)` skips the clip at node i of step k; used to test minimality.
    """
    heat = prob.heat()
    forcing = prob.forcing.values
    n_t, n_x = forcing.shape
    values = np.empty((n_t, n_x))
    eta = np.zeros((n_t, n_x))
    xi = np.zeros((n_t, n_x))
    values[0] = prob.initial.values
    pushed = heat.apply(forcing[:-1])
    for k in range(n_t - 1):
        free = heat.apply(values[k]) + forcing[k + 1] - pushed[k]
        result = projection_substep(free, prob.walls)
        row = np.array(result.values)
        if released is not None and released[0] == k + 1:
            node = released[1]
            row[node] = free[node]
            result = _release(result, node)
        values[k + 1] = row
        eta[k + 1] = result.eta
        xi[k + 1] = result.xi
    return ObstacleSolution(
        path=FieldPath(prob.forcing.grid, prob.forcing.times, values),
        measures=ReflectionMeasures(eta, xi),
        problem=prob,
    )


def released_violation(prob: ObstacleProblem, step: int, node: int) -> float:
    """Largest wall violation after removing the reflection at one charged cell."""
    solution = solve_obstacle(prob, released=(step, node))
    return max(prob.walls.violation(row) for row in solution.path.values)


def lipschitz_ratio(
    v1: PathLike,
    v2: PathLike,
    g: Field,
    walls: WallPair,
    window: float = 1.0,
    propagator: PropagatorName = "implicit",
) -> float:
    """||Phi(v1) - Phi(v2)||_inf / ||v1 - v2||_inf over [0, window]; 0 when v1 = v2."""
    first = as_path(v1).window(window)
    second = as_path(v2).window(window)
    if first.values.shape != second.values.shape or not np.array_equal(first.times, second.times):
        raise ValueError("Forcing paths must share one grid and time mesh.")
    gap = float(np.max(np.abs(first.values - second.values)))
    if gap == 0.0:
        return 0.0
    u1 = solve_obstacle(ObstacleProblem(first, g, walls, propagator)).path.values
    u2 = solve_obstacle(ObstacleProblem(second, g, walls, propagator)).path.values
    return float(np.max(np.abs(u1 - u2))) / gap


def composition_tolerance(dt: float) -> float:
    """Allowed composition discrepancy 5 * dt^(1/2)."""
    return 5.0 * math.sqrt(dt)


def _release(result: StepResult, node: int) -> StepResult:
    eta = np.array(result.eta)
    xi = np.array(result.xi)
    eta[node] = 0.0
    xi[node] = 0.0
    return StepResult(result.values, eta, xi)
