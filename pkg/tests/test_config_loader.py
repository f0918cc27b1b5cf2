import math
from pathlib import Path

import pytest

from wallspde.data.config_loader import ConfigLoader, apply_overrides, wall_range
from wallspde.data.errors import DataLoadError, DataReferenceError, DataValidationError

FIXTURE_DEFINITIONS_DIR = Path(__file__).parent / "fixtures" / "data" / "definitions"
CONFIGS_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_default_config_uses_constant_walls_and_unit_noise() -> None:
    config = ConfigLoader(FIXTURE_DEFINITIONS_DIR).default()

    assert config.grid.n_x == 64
    assert config.walls.preset == "constant"
    assert config.coefficients.sigma.offset == 1.0
    assert config.scheme.scheme == "projected"
    assert config.coupling.n == 1.0
    assert config.coupling.meeting_radius == 6.0
    assert config.seeds.threads is None


def test_load_reads_toml_and_resolves_presets(tmp_path: Path) -> None:
    path = _write_config(
        tmp_path,
        """
initial = "half_cos"

[grid]
n_x = 32

[walls]
preset = "sinusoidal"

[coefficients]
drift = "restoring"
lipschitz = 1.0

[coupling]
n = 50.0
horizons = [1.0, 2.0]
""",
    )

    config = ConfigLoader(FIXTURE_DEFINITIONS_DIR).load(path)

    assert config.grid.n_x == 32
    assert config.initial.cos == (0.5,)
    assert config.walls.lower.sin == (0.3,)
    assert config.coefficients.drift.kind == "linear"
    assert config.coupling.n == 50.0
    assert config.coupling.horizons == (1.0, 2.0)


def test_inline_walls_are_accepted_and_checked(tmp_path: Path) -> None:
    loader = ConfigLoader(FIXTURE_DEFINITIONS_DIR)
    config = loader.from_mapping(
        {"walls": {"lower": {"kind": "constant", "value": -2.0}, "upper": {"kind": "constant", "value": 2.0}}}
    )

    assert config.walls.preset is None
    assert wall_range(config) == (-2.0, 2.0)

    with pytest.raises(DataValidationError):
        loader.from_mapping(
            {"walls": {"lower": {"kind": "constant", "value": 1.0}, "upper": {"kind": "constant", "value": 1.0}}}
        )


def test_walls_reject_preset_and_inline_together() -> None:
    with pytest.raises(DataValidationError):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping(
            {"walls": {"preset": "constant", "lower": {"kind": "constant", "value": -1.0}}}
        )


@pytest.mark.parametrize(
    "raw",
    [
        {"grid": {"n_x": 3}},
        {"grid": {"n_x": 64.0}},
        {"time": {"dt": 0.0}},
        {"time": {"dt": 2.0, "T": 1.0}},
        {"scheme": {"scheme": "smoothed"}},
        {"scheme": {"propagator": "crank"}},
        {"seeds": {"replicas": 0}},
        {"coupling": {"n": -1.0}},
        {"coupling": {"horizons": [10.0, 5.0]}},
        {"coupling": {"meeting_radius": -1.0}},
        {"ergodic": {"alpha": 0.3, "kappa": 0.01}},
        {"derivative": {"epsilon": 1e-4}},
        {"colour": {}},
        {"grid": {"nx": 64}},
    ],
)
def test_invalid_blocks_raise_validation_error(raw: dict) -> None:
    with pytest.raises(DataValidationError):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping(raw)


def test_unknown_preset_raises_reference_error() -> None:
    with pytest.raises(DataReferenceError, match="known: constant, sinusoidal"):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping({"walls": {"preset": "zigzag"}})
    with pytest.raises(DataReferenceError):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping({"initial": "nowhere"})
    with pytest.raises(DataReferenceError, match="restoring, unit, wavy_sigma, zero"):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping({"coefficients": {"drift": "steep"}})


def test_declared_lipschitz_below_coefficient_constant_is_rejected() -> None:
    with pytest.raises(DataValidationError, match="lipschitz"):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).from_mapping(
            {"coefficients": {"drift": "restoring", "lipschitz": 0.5}}
        )


def test_sigma_floor_is_checked_on_the_wall_range() -> None:
    loader = ConfigLoader(FIXTURE_DEFINITIONS_DIR)
    config = loader.from_mapping({"coefficients": {"sigma": "wavy_sigma", "sigma_floor": 0.7}})
    assert config.coefficients.sigma_floor == 0.7

    with pytest.raises(DataValidationError, match="sigma_floor"):
        loader.from_mapping({"coefficients": {"sigma": "wavy_sigma", "sigma_floor": 0.9}})


def test_apply_overrides_replaces_seed_fields() -> None:
    config = ConfigLoader(FIXTURE_DEFINITIONS_DIR).default()

    updated = apply_overrides(config, seed=99, replicas=3, threads=2)

    assert (updated.seeds.master_seed, updated.seeds.replicas, updated.seeds.threads) == (99, 3, 2)
    assert config.seeds.master_seed == 0
    with pytest.raises(DataValidationError):
        apply_overrides(config, threads=0)


def test_missing_config_file_raises_load_error(tmp_path: Path) -> None:
    with pytest.raises(DataLoadError):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).load(tmp_path / "absent.toml")


def test_invalid_toml_raises_load_error(tmp_path: Path) -> None:
    path = _write_config(tmp_path, "[grid\nn_x = 4")

    with pytest.raises(DataLoadError):
        ConfigLoader(FIXTURE_DEFINITIONS_DIR).load(path)


def test_shipped_configs_validate() -> None:
    loader = ConfigLoader()
    paths = sorted(CONFIGS_DIR.glob("*.toml"))

    assert paths
    for path in paths:
        config = loader.load(path)
        assert math.isfinite(config.time.dt)


def test_payload_echoes_every_block() -> None:
    payload = ConfigLoader(FIXTURE_DEFINITIONS_DIR).default().to_payload()

    assert set(payload) == {
        "grid",
        "time",
        "walls",
        "coefficients",
        "scheme",
        "seeds",
        "initial",
        "sweep",
        "obstacle",
        "coupling",
        "ergodic",
        "strong_feller",
        "derivative",
    }


def _write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "experiment.toml"
    path.write_text(text, encoding="utf-8")
    return path
