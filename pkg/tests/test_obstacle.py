import numpy as np
import pytest

from wallspde.core.errors import WallViolationError
from wallspde.domain.circle import CircleGrid, Field, FieldPath
from wallspde.domain.heat_kernel import HeatPropagator
from wallspde.domain.obstacle import (
    ObstacleProblem,
    composition_tolerance,
    lipschitz_ratio,
    released_violation,
    solve_obstacle,
)
from wallspde.domain.profiles import constant_walls


def test_zero_forcing_gives_free_heat_flow_and_no_reflection() -> None:
    grid = CircleGrid(16)
    g = grid.sample(lambda x: 0.5 * np.cos(x))
    forcing = _zero_forcing(grid, steps=20, dt=0.01)

    solution = solve_obstacle(ObstacleProblem(forcing, g, constant_walls(grid)))

    heat = HeatPropagator(grid, 0.01, "implicit")
    assert np.allclose(solution.path.values[-1], heat.apply(g.values, steps=20), atol=1e-12)
    assert solution.measures.total_eta() == 0.0
    assert solution.measures.total_xi() == 0.0


def test_ubar_vanishes_without_forcing_under_the_exact_propagator() -> None:
    grid = CircleGrid(16)
    g = grid.sample(lambda x: 0.5 * np.cos(x))
    problem = ObstacleProblem(_zero_forcing(grid, steps=10, dt=0.01), g, constant_walls(grid), "exponential")

    ubar = solve_obstacle(problem).ubar()

    assert np.max(np.abs(ubar.values)) <= 1e-12


def test_constant_forcing_pins_the_path_to_the_upper_wall() -> None:
    grid = CircleGrid(4)
    values = np.full((6, 4), 2.0)
    values[0] = 0.0
    forcing = FieldPath(grid, 0.01 * np.arange(6), values)

    solution = solve_obstacle(ObstacleProblem(forcing, Field.constant(grid, 0.0), constant_walls(grid)))

    assert np.allclose(solution.path.values[1:], 1.0)
    assert solution.measures.xi[1] == pytest.approx(np.full(4, grid.dx))
    assert solution.measures.total_eta() == 0.0
    assert solution.complementarity() == 0.0


def test_releasing_a_charged_cell_violates_a_wall() -> None:
    grid = CircleGrid(4)
    values = np.full((3, 4), 2.0)
    values[0] = 0.0
    problem = ObstacleProblem(FieldPath(grid, [0.0, 0.01, 0.02], values), Field.constant(grid, 0.0), constant_walls(grid))

    assert released_violation(problem, 1, 2) == pytest.approx(1.0)


def test_shifted_forcing_has_unit_ratio_when_walls_never_bind() -> None:
    grid = CircleGrid(8)
    walls = constant_walls(grid, -1e6, 1e6)
    times = 0.01 * np.arange(11)
    base = np.random.default_rng(0).standard_normal((11, 8))
    base[0] = 0.0
    first = FieldPath(grid, times, base)
    second = FieldPath(grid, times, base + 0.3 * times[:, None])

    ratio = lipschitz_ratio(first, second, Field.constant(grid, 0.0), walls)

    assert ratio == pytest.approx(1.0, abs=1e-9)


def test_lipschitz_ratio_of_identical_paths_is_zero() -> None:
    grid = CircleGrid(8)
    forcing = _zero_forcing(grid, steps=5, dt=0.01)

    assert lipschitz_ratio(forcing, forcing, Field.constant(grid, 0.0), constant_walls(grid)) == 0.0


def test_obstacle_map_is_monotone_under_a_rising_uniform_shift() -> None:
    grid = CircleGrid(16)
    walls = constant_walls(grid, -0.5, 0.5)
    times = 0.01 * np.arange(21)
    lower = np.cumsum(np.random.default_rng(5).standard_normal((21, 16)), axis=0)
    lower[0] = 0.0
    bump = np.abs(np.random.default_rng(6).standard_normal((21, 1)))
    bump[0] = 0.0
    g = Field.constant(grid, 0.0)

    u1 = solve_obstacle(ObstacleProblem(FieldPath(grid, times, lower), g, walls)).path.values
    u2 = solve_obstacle(ObstacleProblem(FieldPath(grid, times, lower + np.cumsum(bump, axis=0)), g, walls)).path.values

    assert float(np.min(u2 - u1)) >= -1e-12


def test_problem_validation() -> None:
    grid = CircleGrid(4)
    walls = constant_walls(grid)
    g = Field.constant(grid, 0.0)

    with pytest.raises(ValueError, match="start at 0"):
        ObstacleProblem(FieldPath(grid, [0.0, 0.1], np.ones((2, 4))), g, walls)
    with pytest.raises(ValueError, match="uniform"):
        ObstacleProblem(FieldPath(grid, [0.0, 0.1, 0.3], np.zeros((3, 4))), g, walls)
    with pytest.raises(ValueError):
        ObstacleProblem(FieldPath(grid, [0.0], np.zeros((1, 4))), g, walls)
    with pytest.raises(WallViolationError):
        ObstacleProblem(_zero_forcing(grid, 2, 0.1), Field.constant(grid, 1.5), walls)


def test_composition_tolerance_scales_with_root_dt() -> None:
    assert composition_tolerance(0.04) == pytest.approx(1.0)


def _zero_forcing(grid: CircleGrid, steps: int, dt: float) -> FieldPath:
    return FieldPath(grid, dt * np.arange(steps + 1), np.zeros((steps + 1, grid.n_x)))
