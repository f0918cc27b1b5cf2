import math

import numpy as np
import pytest

from tests.helpers.stat_asserts import assert_probability, make_params
from wallspde.domain.circle import CircleGrid, Field
from wallspde.domain.coupling import CouplingParams
from wallspde.domain.observables import default_observable_names, parse_observables
from wallspde.domain.profiles import constant_walls
from wallspde.services.ergodic_service import (
    TightnessReport,
    ks_distance,
    ks_null_band,
    occupation_measure,
    tightness_stats,
    two_chain_tv_proxy,
)


def test_ks_null_band_matches_the_asymptotic_formula() -> None:
    expected = math.sqrt(-0.5 * math.log(0.025)) * math.sqrt(2.0 / 100.0)

    assert ks_null_band(100, 100) == pytest.approx(expected)
    assert ks_null_band(400, 400) < ks_null_band(100, 100)
    with pytest.raises(ValueError):
        ks_null_band(0, 10)


def test_ks_distance_extremes() -> None:
    a = np.linspace(0.0, 1.0, 50)

    assert ks_distance(a, a) == 0.0
    assert ks_distance(a, a + 5.0) == 1.0


def test_occupation_measure_samples_after_burn_in_at_the_stride() -> None:
    grid = CircleGrid(8)
    observables = parse_observables(["mean", "sup"], grid)

    summary = occupation_measure(
        Field.constant(grid, 0.0),
        constant_walls(grid),
        horizon=0.2,
        burn_in=0.1,
        stride=2,
        observables=observables,
        p=make_params(),
        master_seed=3,
        replicas=3,
        threads=1,
    )

    assert summary.observables == ("mean", "sup")
    assert summary.samples["mean"].size == 18
    assert np.all(np.diff(summary.samples["sup"]) >= 0.0)
    assert np.all(np.abs(summary.samples["mean"]) <= 1.0)
    assert len(list(summary.csv_rows())) == 36
    assert summary.summary()["samples_per_observable"] == 18


def test_occupation_measure_validates_its_window() -> None:
    grid = CircleGrid(8)
    observables = parse_observables(["mean"], grid)
    u0 = Field.constant(grid, 0.0)
    walls = constant_walls(grid)

    with pytest.raises(ValueError):
        occupation_measure(u0, walls, 0.1, 0.1, 1, observables, make_params(), 0, 1)
    with pytest.raises(ValueError):
        occupation_measure(u0, walls, 0.2, 0.1, 0, observables, make_params(), 0, 1)
    with pytest.raises(ValueError):
        occupation_measure(u0, walls, 0.2, 0.1, 1, [], make_params(), 0, 1)


def test_two_chain_report_shapes() -> None:
    grid = CircleGrid(8)
    observables = parse_observables(["mean", "point:0"], grid)

    report = two_chain_tv_proxy(
        Field.constant(grid, 0.5),
        Field.constant(grid, -0.5),
        constant_walls(grid),
        (0.1, 0.05),
        observables,
        make_params(propagator="implicit"),
        CouplingParams(),
        master_seed=4,
        replicas=5,
        threads=1,
    )

    assert report.t_list == (0.05, 0.1)
    assert set(report.ks) == {"mean", "point:0"}
    assert all(len(values) == 2 for values in report.ks.values())
    for value in report.gap_probability:
        assert_probability(value, "gap probability")
    assert report.null_band == pytest.approx(ks_null_band(5, 5))
    assert len(list(report.csv_rows())) == 4
    assert len(list(report.gap_rows())) == 2


def test_moment_root_is_computed_in_log_space() -> None:
    report = TightnessReport(
        initials=("a", "b"),
        holder={"a": np.array([1.0, 2.0, 3.0]), "b": np.array([2.0, 4.0, 6.0])},
        exponent=0.2,
        kappa=0.5,
        radius=2.5,
    )

    assert report.moment("a") == pytest.approx(14.0 / 3.0)
    assert report.moment_root("a") == pytest.approx(math.sqrt(14.0 / 3.0))
    assert report.ratio() == pytest.approx(2.0)
    assert report.compact_probability("a") == pytest.approx(2.0 / 3.0)
    assert report.compact_probability("b") == pytest.approx(1.0 / 3.0)


def test_moment_ratio_of_vanishing_statistics() -> None:
    zeros = TightnessReport(("a",), {"a": np.zeros(3)}, 0.2, 0.5, 1.0)
    mixed = TightnessReport(("a", "b"), {"a": np.zeros(3), "b": np.ones(3)}, 0.2, 0.5, 1.0)

    assert zeros.ratio() == 1.0
    assert mixed.ratio() == math.inf


def test_tightness_stats_rejects_exponents_outside_the_range() -> None:
    grid = CircleGrid(8)
    g_list = {"zero": Field.constant(grid, 0.0)}

    with pytest.raises(ValueError):
        tightness_stats(g_list, constant_walls(grid), 0.3, 0.01, make_params(), 0, 1)
    with pytest.raises(ValueError):
        tightness_stats(g_list, constant_walls(grid), 0.2, 0.0, make_params(), 0, 1)


@pytest.mark.monte_carlo
def test_tightness_moments_agree_across_initial_data() -> None:
    grid = CircleGrid(32)
    g_list = {"zero": Field.constant(grid, 0.0), "plus": Field.constant(grid, 0.9), "minus": Field.constant(grid, -0.9)}

    report = tightness_stats(g_list, constant_walls(grid), 0.2, 0.05, make_params(dt=1e-3), 0, 200)

    assert report.ratio() <= 2.0


@pytest.mark.monte_carlo
def test_chains_from_opposite_walls_forget_their_start() -> None:
    grid = CircleGrid(16)
    observables = parse_observables(default_observable_names(grid), grid)

    report = two_chain_tv_proxy(
        Field.constant(grid, 0.9),
        Field.constant(grid, -0.9),
        constant_walls(grid),
        (1.0, 20.0),
        observables,
        make_params(dt=5e-3, propagator="implicit"),
        CouplingParams(),
        master_seed=12,
        replicas=1000,
    )

    assert report.final_ks() <= 0.1
    assert report.gap_probability[-1] <= report.gap_probability[0]
