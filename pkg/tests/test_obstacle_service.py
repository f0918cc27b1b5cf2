from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from tests.helpers.stat_asserts import assert_in_range, make_params
from wallspde.core.rng import SeedSpec
from wallspde.data.config_loader import ConfigLoader
from wallspde.domain.circle import CircleGrid, Field, FieldPath
from wallspde.domain.coefficients import Coefficient
from wallspde.domain.obstacle import composition_tolerance
from wallspde.domain.profiles import constant_walls
from wallspde.services.factories import build_experiment
from wallspde.services.obstacle_service import (
    ObstacleService,
    composition_refinement,
    continuity_composition_check,
    lipschitz_study,
    random_forcing,
    rebuild_forcing,
)

FIXTURE_DEFINITIONS_DIR = Path(__file__).parent / "fixtures" / "data" / "definitions"


def test_random_forcing_starts_at_zero_on_the_step_grid() -> None:
    grid = CircleGrid(8)

    forcing = random_forcing(grid, 0.01, 0.2, 3.0, SeedSpec(1, 0, "AUX"))

    assert len(forcing) == 21
    assert np.array_equal(forcing.values[0], np.zeros(8))
    assert np.allclose(np.diff(forcing.times), 0.01)
    assert np.max(np.abs(forcing.values[-1])) > 0.0


def test_random_forcing_is_reproducible() -> None:
    grid = CircleGrid(8)
    seeds = SeedSpec(4, 2, "AUX")

    first = random_forcing(grid, 0.01, 0.1, 1.0, seeds)
    second = random_forcing(grid, 0.01, 0.1, 1.0, seeds)

    assert np.array_equal(first.values, second.values)


def test_lipschitz_study_adds_one_adversarial_pair_per_ten() -> None:
    grid = CircleGrid(8)

    report = lipschitz_study(
        Field.constant(grid, 0.0), constant_walls(grid), dt=0.01, pairs=3, master_seed=7, window=0.2, threads=1
    )

    kinds = [row.kind for row in report.ratios]
    assert kinds == ["independent", "independent", "independent", "adversarial"]
    assert [row.pair for row in report.ratios] == [0, 1, 2, 3]
    assert all(np.isfinite(row.ratio) and row.ratio >= 0.0 for row in report.ratios)
    assert report.passed == (report.max_ratio <= report.bound + 1e-6)
    assert report.summary()["pairs"] == 4
    assert report.summary()["max_by_kind"]["adversarial"] == report.ratios[-1].ratio


def test_lipschitz_study_needs_a_pair() -> None:
    grid = CircleGrid(8)

    with pytest.raises(ValueError):
        lipschitz_study(Field.constant(grid, 0.0), constant_walls(grid), 0.01, 0, master_seed=0)


def test_composition_on_the_run_sheet_reproduces_the_projected_run() -> None:
    grid = CircleGrid(16)

    report = continuity_composition_check(
        Field.constant(grid, 0.0), SeedSpec(13, 0), constant_walls(grid), 0.3, make_params(), refinement=0
    )

    assert report.passed
    assert report.tolerance == pytest.approx(composition_tolerance(0.01))
    assert report.discrepancy <= 1e-8
    assert report.max_violation <= 1e-12


def test_composition_refinement_ratio_matches_its_distances() -> None:
    grid = CircleGrid(8)

    coarse, middle, ratio = composition_refinement(
        Field.constant(grid, 0.0), SeedSpec(2, 0), constant_walls(grid), 0.1, make_params(dt=0.02)
    )

    assert coarse >= 0.0
    assert middle >= 0.0
    if middle > 0.0:
        assert ratio == pytest.approx(coarse / middle)


def test_composition_on_a_finer_sheet_sees_the_time_discretization() -> None:
    grid = CircleGrid(16)

    report = continuity_composition_check(
        Field.constant(grid, 0.0), SeedSpec(13, 0), constant_walls(grid), 0.3, make_params()
    )

    assert report.discrepancy > 1e-6
    assert report.passed


def test_rebuilt_forcing_of_a_constant_push_is_linear_in_time() -> None:
    grid = CircleGrid(8)
    times = 0.01 * np.arange(11)
    path = FieldPath(grid, times, np.zeros((11, 8)))
    p = make_params(drift=Coefficient.constant(5.0), sigma=Coefficient.constant(0.0))

    for refinement in (0, 2):
        forcing = rebuild_forcing(path, p, SeedSpec(1, 0), refinement)
        assert np.allclose(forcing.times, times)
        assert np.allclose(forcing.values, 5.0 * times[:, None], atol=1e-12)


def test_rebuild_forcing_validation() -> None:
    grid = CircleGrid(8)
    path = FieldPath(grid, [0.0, 0.01], np.zeros((2, 8)))

    with pytest.raises(ValueError, match="refinement"):
        rebuild_forcing(path, make_params(), SeedSpec(1, 0), -1)



def test_obstacle_service_reads_its_block() -> None:
    raw = {
        "grid": {"n_x": 8},
        "time": {"dt": 0.01, "T": 0.1},
        "obstacle": {"pairs": 2, "window": 0.1},
        "seeds": {"master_seed": 4, "threads": 1},
    }
    service = ObstacleService(build_experiment(ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping(raw)))

    lipschitz = service.lipschitz()
    composition = service.composition()

    assert [row.kind for row in lipschitz.ratios] == ["independent", "independent", "adversarial"]
    assert lipschitz.bound == 2.0
    assert composition.tolerance == pytest.approx(composition_tolerance(0.01))
    assert composition.passed

@pytest.mark.monte_carlo
def test_composition_discrepancy_shrinks_like_the_square_root_of_dt() -> None:
    grid = CircleGrid(16)
    coarse = replace(make_params(dt=0.02), noise_refinement=1)
    fine = make_params(dt=0.01)

    coarse_mean = _mean_discrepancy(grid, coarse)
    fine_mean = _mean_discrepancy(grid, fine)

    assert_in_range(coarse_mean / fine_mean, 1.2, 2.4, "discrepancy ratio")


def _mean_discrepancy(grid: CircleGrid, p) -> float:
    g = Field.constant(grid, 0.0)
    walls = constant_walls(grid)
    return float(
        np.mean([continuity_composition_check(g, SeedSpec(seed, 0), walls, 0.5, p).discrepancy for seed in range(24)])
    )
