import sys
from pathlib import Path

from wallspde.data import paths


def test_get_definitions_path_base_path(tmp_path: Path) -> None:
    assert paths.get_definitions_path(tmp_path) == tmp_path


def test_get_definitions_path_source_repo_exists() -> None:
    definitions_path = paths.get_definitions_path()
    assert definitions_path.name == "definitions"
    assert (definitions_path / "walls.json").exists()


def test_get_definitions_path_pyinstaller_meipass(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setattr(sys, "frozen", True, raising=False)
    monkeypatch.setattr(sys, "_MEIPASS", str(tmp_path), raising=False)
    expected = tmp_path / "data" / "definitions"
    assert paths.get_definitions_path() == expected


def test_get_output_dir_prefers_override(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setenv(paths.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert paths.get_output_dir(tmp_path / "flag") == tmp_path / "flag"


def test_get_output_dir_reads_environment(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setenv(paths.OUTPUT_DIR_ENV, str(tmp_path))
    assert paths.get_output_dir() == tmp_path


def test_get_output_dir_defaults_to_runs(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.delenv(paths.OUTPUT_DIR_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    assert paths.get_output_dir() == tmp_path / "runs"
