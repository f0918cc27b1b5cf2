import numpy as np
import pytest

from wallspde.core.errors import WallViolationError
from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import CircleGrid, Field
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.noise import NoiseIncrement
from wallspde.domain.profiles import constant_walls
from wallspde.domain.reflected import (
    PenalizedParams,
    penalty_substep,
    projection_substep,
    run_reflected,
    step_count,
    step_penalized,
    step_projected,
)


def test_projection_substep_clips_and_charges_the_upper_wall() -> None:
    grid = CircleGrid(4)
    walls = constant_walls(grid)

    result = projection_substep(np.full(4, 1.3), walls)

    assert np.array_equal(result.values, np.ones(4))
    assert np.allclose(result.xi, 0.3 * grid.dx)
    assert np.array_equal(result.eta, np.zeros(4))


def test_projection_substep_leaves_interior_values_alone() -> None:
    walls = constant_walls(CircleGrid(4))
    values = np.array([0.5, -0.2, 0.0, 0.9])

    result = projection_substep(values, walls)

    assert np.array_equal(result.values, values)
    assert result.eta.sum() == 0.0
    assert result.xi.sum() == 0.0


def test_penalty_substep_solves_the_implicit_penalty() -> None:
    grid = CircleGrid(4)
    walls = constant_walls(grid)

    result = penalty_substep(np.array([1.3, -1.5, 0.0, 0.0]), walls, dt=0.01, epsilon=0.01, delta=0.02)

    assert result.values[0] == pytest.approx(1.15)
    assert result.values[1] == pytest.approx((-1.5 - 0.5) / 1.5)
    assert result.xi[0] == pytest.approx(0.15 * grid.dx)
    assert result.eta[1] == pytest.approx(0.5 * (2.0 / 1.5 - 1.0) * grid.dx)


def test_step_penalized_requires_penalized_scheme() -> None:
    grid = CircleGrid(4)
    params = _params()

    with pytest.raises(ValueError):
        step_penalized(Field.constant(grid, 0.0), constant_walls(grid), NoiseIncrement.zeros(grid, 0.01), params)


def test_step_projected_rejects_input_outside_walls() -> None:
    grid = CircleGrid(4)

    with pytest.raises(WallViolationError):
        step_projected(Field.constant(grid, 1.5), constant_walls(grid), NoiseIncrement.zeros(grid, 0.01), _params())


def test_step_projected_returns_measure_slices() -> None:
    grid = CircleGrid(4)
    push = _params(drift=Coefficient.constant(100.0), sigma=Coefficient.constant(0.0))

    field, eta, xi = step_projected(Field.constant(grid, 0.9), constant_walls(grid), NoiseIncrement.zeros(grid, 0.01), push)

    assert np.allclose(field.values, 1.0)
    assert field.time == pytest.approx(0.01)
    assert np.all(xi > 0.0)
    assert eta.sum() == 0.0


def test_run_reflected_is_deterministic() -> None:
    grid = CircleGrid(16)
    walls = constant_walls(grid)
    params = _params(dt=1e-3)

    first = run_reflected(Field.constant(grid, 0.0), walls, 0.05, params, SeedSpec(8))
    second = run_reflected(Field.constant(grid, 0.0), walls, 0.05, params, SeedSpec(8))

    assert np.array_equal(first.path.values, second.path.values)
    assert np.array_equal(first.measures.xi, second.measures.xi)


def test_projected_run_stays_between_walls_with_exact_complementarity() -> None:
    grid = CircleGrid(16)
    walls = constant_walls(grid, -0.1, 0.1)
    params = _params(dt=1e-3, sigma=Coefficient.constant(3.0))

    record = run_reflected(Field.constant(grid, 0.0), walls, 0.2, params, SeedSpec(12))

    assert record.max_violation == 0.0
    assert record.complementarity == (0.0, 0.0)
    assert record.measures.total_eta() > 0.0
    assert record.measures.total_xi() > 0.0


def test_constant_push_pins_the_run_to_the_upper_wall() -> None:
    grid = CircleGrid(8)
    params = _params(dt=0.01, drift=Coefficient.constant(5.0), sigma=Coefficient.constant(0.0))

    record = run_reflected(Field.constant(grid, 0.95), constant_walls(grid), 0.1, params, SeedSpec(0))

    assert np.allclose(record.path.values[1:], 1.0)
    assert record.measures.total_xi() > 0.0
    assert record.measures.total_eta() == 0.0


def test_record_every_sums_measures_over_windows() -> None:
    grid = CircleGrid(8)
    walls = constant_walls(grid, -0.2, 0.2)
    params = _params(dt=1e-3, sigma=Coefficient.constant(2.0))
    u0 = Field.constant(grid, 0.0)

    every = run_reflected(u0, walls, 0.03, params, SeedSpec(1))
    sparse = run_reflected(u0, walls, 0.03, params, SeedSpec(1), record_every=10)

    assert len(sparse.path) == 4
    assert np.array_equal(sparse.path.values[-1], every.path.values[-1])
    assert sparse.measures.total_xi() == pytest.approx(every.measures.total_xi())
    assert sparse.measures.total_eta() == pytest.approx(every.measures.total_eta())


def test_trailing_partial_window_keeps_its_measures() -> None:
    grid = CircleGrid(8)
    walls = constant_walls(grid, -0.2, 0.2)
    params = _params(dt=1e-3, sigma=Coefficient.constant(2.0))
    u0 = Field.constant(grid, 0.0)

    every = run_reflected(u0, walls, 0.035, params, SeedSpec(1))
    sparse = run_reflected(u0, walls, 0.035, params, SeedSpec(1), record_every=10)

    assert np.allclose(sparse.times, [0.0, 0.01, 0.02, 0.03, 0.035])
    assert np.array_equal(sparse.path.values[-1], every.path.values[-1])
    assert sparse.measures.total_xi() == pytest.approx(every.measures.total_xi())
    assert sparse.measures.total_eta() == pytest.approx(every.measures.total_eta())
    assert np.allclose(sparse.measures.xi[-1], every.measures.xi[-5:].sum(axis=0))


def test_constant_push_into_the_upper_wall_charges_xi_at_the_push_rate() -> None:
    grid = CircleGrid(8)
    params = _params(dt=1e-4, drift=Coefficient.constant(5.0), sigma=Coefficient.constant(0.0))

    record = run_reflected(Field.constant(grid, 0.0), constant_walls(grid), 1.0, params, SeedSpec(0))

    # u reaches the wall at t = 0.2; the remaining 0.8 time units push 5 * 2*pi per unit time.
    assert record.measures.total_xi() == pytest.approx(8.0 * np.pi, rel=0.02)
    assert record.measures.total_eta() == 0.0


def test_run_reflected_rejects_initial_data_outside_walls() -> None:
    grid = CircleGrid(8)

    with pytest.raises(WallViolationError):
        run_reflected(Field.constant(grid, 1.2), constant_walls(grid), 0.1, _params(), SeedSpec(0))


def test_penalized_params_validation() -> None:
    with pytest.raises(ValueError):
        _params(dt=0.0)
    with pytest.raises(ValueError):
        PenalizedParams(0.0, 0.1, 0.01, Coefficient.constant(0.0), Coefficient.constant(1.0))
    with pytest.raises(ValueError):
        PenalizedParams(
            0.1, 0.1, 0.01, Coefficient.linear(-2.0), Coefficient.constant(1.0), lipschitz=1.0
        )


def test_lipschitz_constant_defaults_to_the_coefficients() -> None:
    params = _params(drift=Coefficient.linear(-2.0), sigma=Coefficient.sine(1.0, 0.5, 2.0))

    assert params.L == 2.0
    assert params.check_lipschitz(-1.0, 1.0)


def test_step_count_rounds_and_rejects_short_horizons() -> None:
    assert step_count(1.0, 0.1) == 10
    with pytest.raises(ValueError):
        step_count(0.01, 0.1)
    with pytest.raises(ValueError):
        step_count(0.0, 0.1)


def test_summary_reports_records_and_masses() -> None:
    grid = CircleGrid(8)
    record = run_reflected(Field.constant(grid, 0.0), constant_walls(grid), 0.01, _params(dt=1e-3), SeedSpec(2))

    summary = record.summary()

    assert summary["steps"] == 10
    assert summary["records"] == 11
    assert len(list(record.csv_rows())) == 11 * 8


def _params(
    dt: float = 0.01,
    drift: Coefficient | None = None,
    sigma: Coefficient | None = None,
    scheme: str = "projected",
) -> PenalizedParams:
    return PenalizedParams(
        epsilon=0.01,
        delta=0.01,
        dt=dt,
        drift=drift or Coefficient.constant(0.0),
        sigma=sigma or Coefficient.constant(1.0),
        scheme=scheme,
    )
