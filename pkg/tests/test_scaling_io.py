"""Tests for sweep manifests and sweep artifacts."""

from __future__ import annotations

from pathlib import Path

import pytest

from matscale.exceptions import ConfigError, DataLoadError
from matscale.models.config import ModelConfig
from matscale.scaling.fit import fit_power_law
from matscale.scaling.io import load_manifest, read_fits, read_runs, write_fits, write_runs
from matscale.training.records import RunRecord

DATA_MANIFEST = """\
name: data-sweep
axis: data
grid: [100.0, 300, 1000]
model:
  d_model: 16
  n_layers: 1
  n_heads: 2
  d_ff: 32
train:
  batch_size: 8
  epochs: 3
dataset:
  n_materials: 2000
  atoms_min: 2
  atoms_max: 6
repetitions: 3
"""


def _write(tmp_path: Path, text: str, name: str = "sweep.yaml") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadManifest:
    """Reading and validating sweep manifests."""

    def test_data_manifest(self, tmp_path: Path) -> None:
        spec = load_manifest(_write(tmp_path, DATA_MANIFEST))
        assert spec.name == "data-sweep"
        assert spec.grid == [100, 300, 1000]
        assert spec.model.d_model == 16
        assert spec.train.batch_size == 8
        assert spec.train.max_lr == 6e-4
        assert spec.dataset.atoms_max == 6
        assert spec.seeds() == [0, 1, 2]

    def test_params_manifest_as_json(self, tmp_path: Path) -> None:
        text = (
            '{"axis": "params", "grid": ['
            '{"d_model": 8, "n_heads": 2, "d_ff": 16}, {"d_model": 16, "n_heads": 2, "d_ff": 32}]}'
        )
        spec = load_manifest(_write(tmp_path, text, "sweep.json"))
        assert spec.grid == [
            ModelConfig(d_model=8, n_heads=2, d_ff=16),
            ModelConfig(d_model=16, n_heads=2, d_ff=32),
        ]

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(DataLoadError, match="not found"):
            load_manifest(tmp_path / "absent.yaml")

    def test_invalid_syntax(self, tmp_path: Path) -> None:
        with pytest.raises(DataLoadError, match="syntax"):
            load_manifest(_write(tmp_path, "axis: [data\n"))

    def test_schema_violation(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError) as exc_info:
            load_manifest(_write(tmp_path, "axis: time\ngrid: [1, 2]\n"))
        assert exc_info.value.errors

    def test_semantic_violation(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="increasing"):
            load_manifest(_write(tmp_path, "axis: data\ngrid: [300, 100]\n"))

    def test_invalid_train_settings(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError) as exc_info:
            load_manifest(_write(tmp_path, "axis: data\ngrid: [10]\ntrain:\n  batch_size: 0\n"))
        assert "batch_size" in (exc_info.value.field or "")


class TestArtifacts:
    """runs.json and fits.json."""

    def test_runs_round_trip(self, tmp_path: Path) -> None:
        records = [
            RunRecord(run_id="a", axis="data", axis_value=10.0, tags=["anomalous"]),
            RunRecord(run_id="b"),
        ]
        path = write_runs(records, tmp_path / "out" / "runs.json")
        assert read_runs(path) == records

    def test_fits_round_trip_is_deterministic(self, tmp_path: Path) -> None:
        fit = fit_power_law([(1e3, 12.5), (1e4, 7.16), (1e5, 4.10)], axis="D", exclusions=["x"])
        first = write_fits([fit], tmp_path / "fits.json").read_bytes()
        second = write_fits(read_fits(tmp_path / "fits.json"), tmp_path / "again.json").read_bytes()
        assert first == second
        assert read_fits(tmp_path / "fits.json")[0].exclusions == ["x"]

    def test_malformed_runs(self, tmp_path: Path) -> None:
        with pytest.raises(DataLoadError, match="Invalid run records"):
            read_runs(_write(tmp_path, '{"records": []}', "runs.json"))

    def test_missing_fits(self, tmp_path: Path) -> None:
        with pytest.raises(DataLoadError):
            read_fits(tmp_path / "fits.json")


SWEEPS_DIR = Path(__file__).resolve().parents[1] / "sweeps"


@pytest.mark.parametrize("path", sorted(SWEEPS_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_bundled_manifests_load(path: Path) -> None:
    spec = load_manifest(path)
    assert spec.axis == path.stem
    assert len(spec.grid) >= 3
