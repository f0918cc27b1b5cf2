import numpy as np
import pytest

from wallspde.core.errors import NumericalBlowUpError, SeedMismatchError
from wallspde.core.rng import SeedSpec
from wallspde.domain.circle import CircleGrid, Field
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.mollified import (
    MollifiedCoefficients,
    derivative_flow,
    finite_difference_flow,
    mollifier_cdf,
    mollifier_excess,
    run_mollified,
)
from wallspde.domain.profiles import constant_walls
from wallspde.domain.reflected import PenalizedParams


def test_mollifier_tables_have_the_right_limits() -> None:
    assert mollifier_cdf(-2.0) == 0.0
    assert mollifier_cdf(2.0) == 1.0
    assert float(mollifier_cdf(0.0)) == pytest.approx(0.5, abs=1e-6)
    assert float(mollifier_excess(-3.0)) == pytest.approx(3.0)
    assert float(mollifier_excess(1.5)) == 0.0


def test_smoothed_penalties_match_the_hinges_away_from_the_walls() -> None:
    grid = CircleGrid(8)
    mc = _coefficients(grid, n=10)

    assert np.allclose(mc.k(np.full(8, -2.0)), 1.0)
    assert np.allclose(mc.k(np.full(8, 0.0)), 0.0)
    assert np.allclose(mc.l(np.full(8, 1.5)), 0.5)
    assert np.allclose(mc.l(np.full(8, 0.0)), 0.0)


def test_penalty_derivatives_have_the_right_signs() -> None:
    mc = _coefficients(CircleGrid(8), n=50)

    max_dk, min_dl = mc.sign_check(-2.0, 2.0)

    assert max_dk <= 0.0
    assert min_dl >= 0.0


def test_mollified_constant_coefficient_is_unchanged() -> None:
    mc = _coefficients(CircleGrid(8), n=5)

    assert np.allclose(mc.sigma_n(np.linspace(-1.0, 1.0, 5)), 1.0)
    assert np.allclose(mc.dsigma(np.linspace(-1.0, 1.0, 5)), 0.0)


def test_mollified_linear_drift_keeps_its_slope() -> None:
    grid = CircleGrid(8)
    mc = MollifiedCoefficients(20, Coefficient.linear(-1.0), Coefficient.constant(1.0), constant_walls(grid))
    z = np.linspace(-1.0, 1.0, 7)

    assert np.allclose(mc.f(z), -z, atol=1e-12)
    assert np.allclose(mc.df(z), -1.0)


def test_bandwidth_must_be_a_positive_integer() -> None:
    walls = constant_walls(CircleGrid(8))

    with pytest.raises(ValueError):
        MollifiedCoefficients(0, Coefficient.constant(0.0), Coefficient.constant(1.0), walls)
    with pytest.raises(ValueError):
        MollifiedCoefficients(2.5, Coefficient.constant(0.0), Coefficient.constant(1.0), walls)


def test_explicit_penalty_needs_a_small_step() -> None:
    grid = CircleGrid(8)

    with pytest.raises(ValueError):
        run_mollified(Field.constant(grid, 0.0), _coefficients(grid), 1e-3, 1e-2, 0.1, _params(dt=1e-2), SeedSpec(0))


def test_derivative_flow_matches_finite_differences() -> None:
    grid = CircleGrid(16)
    mc = _coefficients(grid, n=20, sigma=Coefficient.sine(1.0, 0.3, 1.0))
    u0 = grid.sample(lambda x: 0.5 * np.cos(x))
    direction = grid.sample(np.cos)
    params = _params()
    seeds = SeedSpec(11)

    flow = derivative_flow(u0, direction, mc, 0.01, 0.01, 0.05, params, seeds)
    fd = finite_difference_flow(u0, direction, 1e-5, mc, 0.01, 0.01, 0.05, params, seeds)

    scale = float(np.max(np.abs(flow.path.values)))
    assert float(np.max(np.abs(fd.values - flow.path.values))) <= 0.05 * scale


def test_derivative_flow_without_noise_or_walls_is_heat_flow() -> None:
    grid = CircleGrid(16)
    walls = constant_walls(grid, -100.0, 100.0)
    mc = MollifiedCoefficients(10, Coefficient.constant(0.0), Coefficient.constant(0.0), walls)
    direction = grid.sample(np.cos)
    params = _params()

    flow = derivative_flow(Field.constant(grid, 0.0), direction, mc, 0.01, 0.01, 0.1, params, SeedSpec(0))

    heat = params.heat(grid)
    assert np.allclose(flow.path.values[-1], heat.apply(direction.values, steps=100), atol=1e-12)
    assert flow.energy_ratio()[0] == pytest.approx(1.0)


def test_derivative_flow_rejects_a_foreign_base_path() -> None:
    grid = CircleGrid(8)
    mc = _coefficients(grid)
    u0 = Field.constant(grid, 0.0)
    base = run_mollified(u0, mc, 0.01, 0.01, 0.01, _params(), SeedSpec(1))

    with pytest.raises(SeedMismatchError):
        derivative_flow(u0, grid.sample(np.cos), mc, 0.01, 0.01, 0.01, _params(), SeedSpec(2), base=base)


def test_zero_direction_has_zero_energy_ratio() -> None:
    grid = CircleGrid(8)
    mc = _coefficients(grid)

    flow = derivative_flow(Field.constant(grid, 0.0), Field.constant(grid, 0.0), mc, 0.01, 0.01, 0.01, _params(), SeedSpec(3))

    assert np.array_equal(flow.energy_ratio(), np.zeros(11))


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_mollified_drift_is_within_lipschitz_over_n(n: int) -> None:
    grid = CircleGrid(8)
    drift = Coefficient.sine(0.0, 1.5, 2.0)
    mc = MollifiedCoefficients(n, drift, Coefficient.constant(1.0), constant_walls(grid))
    z = np.linspace(-2.0, 2.0, 801)

    assert float(np.max(np.abs(mc.f(z) - drift(z)))) <= drift.lipschitz / n


def test_derivative_flow_is_linear_in_its_direction() -> None:
    grid = CircleGrid(16)
    mc = _coefficients(grid, n=20, sigma=Coefficient.sine(1.0, 0.3, 1.0))
    u0 = grid.sample(lambda x: 0.5 * np.cos(x))
    params = _params()
    seeds = SeedSpec(12)
    base = run_mollified(u0, mc, 0.01, 0.01, 0.05, params, seeds)
    first = grid.sample(np.cos)
    second = grid.sample(lambda x: np.sin(2.0 * x))

    def flow(direction: Field) -> np.ndarray:
        return derivative_flow(u0, direction, mc, 0.01, 0.01, 0.05, params, seeds, base=base).path.values

    combined = flow(first.with_values(2.0 * first.values - 3.0 * second.values))
    expected = 2.0 * flow(first) - 3.0 * flow(second)
    scale = max(1.0, float(np.max(np.abs(expected))))
    assert float(np.max(np.abs(combined - expected))) <= 1e-10 * scale


def test_mollified_run_reports_a_blow_up() -> None:
    grid = CircleGrid(8)
    walls = constant_walls(grid)
    wild = MollifiedCoefficients(5, Coefficient.linear(1e300), Coefficient.constant(1.0), walls)

    with pytest.raises(NumericalBlowUpError, match="non-finite"):
        run_mollified(Field.constant(grid, 0.5), wild, 0.01, 0.01, 0.01, _params(), SeedSpec(0))


def test_derivative_flow_reports_a_blow_up() -> None:
    grid = CircleGrid(8)
    walls = constant_walls(grid)
    u0 = Field.constant(grid, 0.0)
    base = run_mollified(u0, _coefficients(grid), 0.01, 0.01, 0.01, _params(), SeedSpec(0))
    wild = MollifiedCoefficients(5, Coefficient.linear(1e300), Coefficient.constant(1.0), walls)

    with pytest.raises(NumericalBlowUpError):
        derivative_flow(u0, grid.sample(np.cos), wild, 0.01, 0.01, 0.01, _params(), SeedSpec(0), base=base)


def _coefficients(grid: CircleGrid, n: int = 20, sigma: Coefficient | None = None) -> MollifiedCoefficients:
    return MollifiedCoefficients(n, Coefficient.constant(0.0), sigma or Coefficient.constant(1.0), constant_walls(grid))


def _params(dt: float = 1e-3) -> PenalizedParams:
    return PenalizedParams(0.01, 0.01, dt, Coefficient.constant(0.0), Coefficient.constant(1.0))
