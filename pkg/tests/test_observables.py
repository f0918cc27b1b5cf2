import math

import numpy as np
import pytest

from wallspde.domain.circle import CircleGrid
from wallspde.domain.observables import default_observable_names, parse_observable, parse_observables


def test_point_and_mean_observables() -> None:
    grid = CircleGrid(4)
    values = np.array([1.0, 2.0, 3.0, 6.0])

    assert parse_observable("point:2", grid)(values) == 3.0
    assert parse_observable("mean", grid)(values) == 3.0
    assert parse_observable("sup", grid)(values) == 6.0


def test_observables_act_on_whole_paths() -> None:
    grid = CircleGrid(4)
    path = np.array([[0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]])

    result = parse_observable("mean", grid)(path)

    assert np.array_equal(result, np.array([0.0, 1.0]))


def test_bounded_observables_carry_a_sup_bound() -> None:
    grid = CircleGrid(4)

    sin_mean = parse_observable("sin_mean", grid)
    assert sin_mean.bounded
    assert sin_mean.sup_bound == 1.0
    assert sin_mean(np.full(4, math.pi / 2)) == pytest.approx(1.0)
    assert parse_observable("tanh_point:1", grid).sup_bound == 1.0
    assert parse_observable("constant:2.5", grid).sup_bound == 2.5
    assert not parse_observable("mean", grid).bounded


def test_mean_positive_counts_the_positive_share() -> None:
    grid = CircleGrid(4)

    assert parse_observable("mean_positive", grid)(np.array([1.0, -1.0, 2.0, 0.0])) == 0.5


def test_mean_sign_indicates_a_positive_mean() -> None:
    grid = CircleGrid(4)
    sign = parse_observable("mean_sign", grid)

    assert sign.sup_bound == 1.0
    assert np.array_equal(sign(np.array([[1.0, -0.5, 0.0, 0.0], [-1.0, 0.5, 0.0, 0.0]])), np.array([1.0, 0.0]))
    assert sign(np.zeros(4)) == 0.0


@pytest.mark.parametrize("descriptor", ["point:9", "point:x", "median", "constant:abc"])
def test_bad_descriptors_raise(descriptor: str) -> None:
    with pytest.raises(ValueError):
        parse_observable(descriptor, CircleGrid(8))


def test_default_observables_cover_four_points_mean_and_sup() -> None:
    grid = CircleGrid(16)

    names = default_observable_names(grid)

    assert names == ("point:0", "point:4", "point:8", "point:12", "mean", "sup")
    assert len(parse_observables(names, grid)) == 6
