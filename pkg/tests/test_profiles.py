import numpy as np
import pytest

from wallspde.domain.circle import CircleGrid
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.profiles import Profile, build_walls, constant_walls


def test_fourier_profile_sums_its_modes() -> None:
    profile = Profile.fourier(0.5, cos=(1.0,), sin=(0.0, 2.0))
    x = np.array([0.0, np.pi / 4])

    assert np.allclose(profile(x), 0.5 + np.cos(x) + 2.0 * np.sin(2.0 * x))


def test_constant_profile_rejects_modes() -> None:
    with pytest.raises(ValueError):
        Profile("constant", 1.0, cos=(1.0,))
    with pytest.raises(ValueError):
        Profile("spline")


def test_sinusoidal_walls_are_separated_on_a_grid() -> None:
    grid = CircleGrid(32)

    walls = build_walls(grid, Profile.fourier(-1.0, sin=(0.3,)), Profile.fourier(1.0, cos=(0.3,)))

    assert np.all(walls.upper.values - walls.lower.values > 1.0)
    assert constant_walls(grid).value_range() == (-1.0, 1.0)


def test_coefficient_shapes_and_derivatives() -> None:
    z = np.linspace(-1.0, 1.0, 5)

    assert np.allclose(Coefficient.linear(2.0, 1.0)(z), 1.0 + 2.0 * z)
    assert np.allclose(Coefficient.sine(1.0, 0.5, 2.0).derivative(z), np.cos(2.0 * z))
    assert np.allclose(Coefficient.tanh(0.0, 1.0).derivative(0.0), 1.0)
    assert np.array_equal(Coefficient.constant(3.0)(z), np.full(5, 3.0))


def test_coefficient_lipschitz_constants() -> None:
    assert Coefficient.constant(2.0).lipschitz == 0.0
    assert Coefficient.linear(-3.0).lipschitz == 3.0
    assert Coefficient.sine(0.0, 0.5, 4.0).lipschitz == 2.0
    assert Coefficient.sine(0.0, 0.5, 4.0).check_lipschitz(-2.0, 2.0)
    assert not Coefficient.linear(-3.0).check_lipschitz(-1.0, 1.0, bound=1.0)


def test_coefficient_monotonicity_and_bounds() -> None:
    assert Coefficient.linear(-1.0).is_nonincreasing()
    assert not Coefficient.tanh(0.0, 1.0).is_nonincreasing()
    assert Coefficient.sine(1.0, 0.25).bounds_on(-np.pi / 2, np.pi / 2) == pytest.approx((0.75, 1.25))


def test_coefficient_rejects_unknown_kind_and_non_finite_values() -> None:
    with pytest.raises(ValueError):
        Coefficient("cubic")
    with pytest.raises(ValueError):
        Coefficient("linear", amplitude=float("inf"))
