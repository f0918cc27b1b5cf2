import csv
import json
from pathlib import Path

import pytest

from wallspde.core.errors import NumericalBlowUpError, OrderingViolationError
from wallspde.presentation.cli import app
from wallspde.services.manifest import CheckResult

TINY_CONFIG = """
initial = "zero"

[grid]
n_x = 8

[time]
dt = 0.01
T = 0.1
burn_in = 0.05

[seeds]
master_seed = 3
replicas = 2
threads = 1
"""

COUPLE_BLOCK = """
[scheme]
propagator = "implicit"

[coupling]
horizons = [0.1, 0.2]
"""

CONFIGS_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_simulate_writes_trajectory_and_manifest(tmp_path: Path) -> None:
    out = tmp_path / "simulate"

    status = app.run("simulate", _write_config(tmp_path, TINY_CONFIG), out=out)

    assert status == app.EXIT_OK
    with (out / "trajectory.csv").open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) > 1
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["format"] == "wallspde-run/1"
    assert manifest["seeds"]["master_seed"] == 3
    assert {check["name"] for check in manifest["checks"]} == {"walls_held", "sup_norm_bound"}
    assert all(check["passed"] for check in manifest["checks"])
    assert manifest["artifacts"] == ["manifest.json", "trajectory.csv"]


def test_seed_override_reaches_the_manifest(tmp_path: Path) -> None:
    out = tmp_path / "run"

    app.run("simulate", _write_config(tmp_path, TINY_CONFIG), out=out, seed=41, replicas=1)

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seeds"] == {"master_seed": 41, "replicas": 1, "stream_tags": ["W1", "W2", "AUX"]}


def test_same_seed_gives_identical_trajectories(tmp_path: Path) -> None:
    config = _write_config(tmp_path, TINY_CONFIG)

    app.run("simulate", config, out=tmp_path / "a")
    app.run("simulate", config, out=tmp_path / "b")

    first = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert first == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_kernel_check_passes_on_the_default_grid(tmp_path: Path) -> None:
    status = app.run("kernel-check", out=tmp_path, seed=0)

    assert status == app.EXIT_OK
    assert (tmp_path / "kernel_check.csv").exists()


@pytest.mark.parametrize(
    "text",
    [
        "[grid]\nn_x = 2\n",
        "[grid]\nsize = 8\n",
        "[time]\ndt = 1.0\nT = 0.5\n",
        "[scheme]\nscheme = \"euler\"\n",
        "not toml at all = = =\n",
    ],
)
def test_invalid_configs_exit_with_validation_status(tmp_path: Path, text: str) -> None:
    out = tmp_path / "out"

    status = app.run("simulate", _write_config(tmp_path, text), out=out)

    assert status == app.EXIT_VALIDATION
    assert not (out / "manifest.json").exists()


def test_missing_config_file_is_a_validation_error(tmp_path: Path) -> None:
    assert app.run("simulate", tmp_path / "absent.toml", out=tmp_path) == app.EXIT_VALIDATION


def test_unknown_subcommand_raises() -> None:
    with pytest.raises(ValueError):
        app.run("teleport")


def test_blow_up_exits_with_numerical_status(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    def exploding(experiment, store, manifest) -> None:
        raise NumericalBlowUpError("Time step produced non-finite values.")

    monkeypatch.setitem(app.HANDLERS, "simulate", exploding)

    status = app.run("simulate", _write_config(tmp_path, TINY_CONFIG), out=tmp_path / "out")

    assert status == app.EXIT_NUMERICAL
    assert (tmp_path / "out" / "manifest.json").exists()


def test_ordering_violation_exits_with_numerical_status(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    def crossing(experiment, store, manifest) -> None:
        raise OrderingViolationError("Coupled pair crossed by 1.000e-03 at step 4.")

    monkeypatch.setitem(app.HANDLERS, "couple", crossing)

    status = app.run("couple", _write_config(tmp_path, TINY_CONFIG), out=tmp_path / "out")

    assert status == app.EXIT_NUMERICAL
    assert (tmp_path / "out" / "manifest.json").exists()


def test_couple_keeps_the_pair_ordered(tmp_path: Path) -> None:
    out = tmp_path / "couple"

    status = app.run("couple", _write_config(tmp_path, TINY_CONFIG + COUPLE_BLOCK), out=out)

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    checks = {check["name"]: check for check in manifest["checks"]}
    assert status == app.EXIT_OK
    assert checks["ordering"]["passed"]
    assert manifest["summary"]["coupling_params"] == {"n": 1.0, "zeta": 1e-9, "sigma_floor": None, "meeting_radius": 6.0}
    assert manifest["summary"]["coupling"]["max_crossing"] <= 1e-10


def test_couple_rejects_a_propagator_that_does_not_keep_order(tmp_path: Path) -> None:
    out = tmp_path / "couple"
    text = TINY_CONFIG + "\n[coupling]\nhorizons = [0.1, 0.2]\n"

    status = app.run("couple", _write_config(tmp_path, text), out=out)

    assert status == app.EXIT_VALIDATION


def test_aborted_replicas_exit_with_numerical_status(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    def aborting(experiment, store, manifest) -> None:
        manifest.aborted[1] = "Time step produced non-finite values."

    monkeypatch.setitem(app.HANDLERS, "simulate", aborting)
    out = tmp_path / "out"

    status = app.run("simulate", _write_config(tmp_path, TINY_CONFIG), out=out)

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert status == app.EXIT_NUMERICAL
    assert manifest["aborted_replicas"] == {"1": "Time step produced non-finite values."}


def test_failed_checks_only_fail_check_subcommands(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    def failing(experiment, store, manifest) -> None:
        manifest.checks.append(CheckResult("lipschitz_factor", False, 2.5, 2.0))

    monkeypatch.setitem(app.HANDLERS, "obstacle-check", failing)
    monkeypatch.setitem(app.HANDLERS, "simulate", failing)
    config = _write_config(tmp_path, TINY_CONFIG)

    assert app.run("obstacle-check", config, out=tmp_path / "check") == app.EXIT_ACCEPTANCE
    assert app.run("simulate", config, out=tmp_path / "plain") == app.EXIT_OK


@pytest.mark.monte_carlo
def test_shipped_coupling_config_couples_the_pair(tmp_path: Path) -> None:
    out = tmp_path / "couple"

    status = app.run("couple", CONFIGS_DIR / "coupling.toml", out=out)

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    checks = {check["name"]: check for check in manifest["checks"]}
    probabilities = [row["probability"] for row in manifest["summary"]["coupling"]["coupling_probability"].values()]
    assert status == app.EXIT_OK
    for name in ("coupling_probability_increasing", "coupling_probability_final", "ordering", "mean_U_nonincreasing"):
        assert checks[name]["passed"], name
    assert all(later > earlier for earlier, later in zip(probabilities, probabilities[1:]))
    assert probabilities[-1] >= 0.5


def test_main_parses_flags(tmp_path: Path) -> None:
    config = _write_config(tmp_path, TINY_CONFIG)
    out = tmp_path / "main"

    status = app.main(["simulate", "--config", str(config), "--out", str(out), "--replicas", "1"])

    assert status == app.EXIT_OK
    assert (out / "manifest.json").exists()


def test_parser_lists_every_subcommand() -> None:
    parser = app.build_parser()

    for name in app.HANDLERS:
        args = parser.parse_args([name, "--seed", "5"])
        assert args.subcommand == name
        assert args.seed == 5


def test_output_directory_defaults_to_the_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("WALLSPDE_OUTPUT_DIR", str(tmp_path / "runs"))

    app.run("simulate", _write_config(tmp_path, TINY_CONFIG), replicas=1)

    assert (tmp_path / "runs" / "simulate" / "manifest.json").exists()


def _write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "experiment.toml"
    path.write_text(text, encoding="utf-8")
    return path
