"""Tests for record and manifest validation."""

from __future__ import annotations

from typing import Any

import numpy as np
import pytest

from matscale.data.records import MaterialRecord
from matscale.exceptions import ConfigError, DataLoadError
from matscale.validator import collect_schema_errors, validate_manifest_dict, validate_material_dict


@pytest.fixture
def valid_record_data(record: MaterialRecord) -> dict[str, Any]:
    """JSON form of a valid 3-atom record."""
    return record.to_json_dict()


@pytest.fixture
def valid_manifest_data() -> dict[str, Any]:
    return {
        "name": "tiny",
        "axis": "data",
        "dataset": {"n_materials": 20},
        "model": {"d_model": 8, "n_layers": 1, "n_heads": 2, "d_ff": 16},
        "train": {"batch_size": 4, "epochs": 1},
        "grid": [4, 8],
    }


def test_valid_record_passes(valid_record_data: dict[str, Any], record: MaterialRecord) -> None:
    assert collect_schema_errors(valid_record_data) == []
    assert validate_material_dict(valid_record_data) == record


def test_frac_is_optional(valid_record_data: dict[str, Any]) -> None:
    del valid_record_data["frac"]
    result = validate_material_dict(valid_record_data)
    assert result.frac_positions is not None
    np.testing.assert_allclose(result.frac_positions @ result.cell, result.cart_positions, atol=1e-12)


def test_missing_required_field(valid_record_data: dict[str, Any]) -> None:
    del valid_record_data["energy"]
    errors = collect_schema_errors(valid_record_data)
    assert errors[0]["field"] == "energy"
    assert errors[0]["validator"] == "required"


def test_unknown_field_is_rejected(valid_record_data: dict[str, Any]) -> None:
    valid_record_data["charge"] = 1
    with pytest.raises(DataLoadError) as exc_info:
        validate_material_dict(valid_record_data)
    assert exc_info.value.field == "charge"


@pytest.mark.parametrize("number", [0, 119])
def test_atomic_number_range(valid_record_data: dict[str, Any], number: int) -> None:
    valid_record_data["atomic_numbers"][0] = number
    with pytest.raises(DataLoadError) as exc_info:
        validate_material_dict(valid_record_data)
    assert exc_info.value.field == "atomic_numbers"


def test_asymmetric_stress(valid_record_data: dict[str, Any]) -> None:
    valid_record_data["stress"][0][1] += 1e-6
    with pytest.raises(DataLoadError) as exc_info:
        validate_material_dict(valid_record_data, file_path="data.jsonl", line_number=7)
    assert exc_info.value.field == "stress"
    assert exc_info.value.line_number == 7
    assert "data.jsonl, line 7" in str(exc_info.value)


def test_inconsistent_frac(valid_record_data: dict[str, Any]) -> None:
    valid_record_data["frac"][0][0] += 0.1
    with pytest.raises(DataLoadError) as exc_info:
        validate_material_dict(valid_record_data)
    assert exc_info.value.field == "frac"


def test_per_atom_shape_mismatch(valid_record_data: dict[str, Any]) -> None:
    valid_record_data["cart"] = valid_record_data["cart"][:2]
    with pytest.raises(DataLoadError) as exc_info:
        validate_material_dict(valid_record_data)
    assert exc_info.value.field == "cart"


def test_non_object_record() -> None:
    with pytest.raises(DataLoadError):
        validate_material_dict([1, 2, 3])


class TestManifestValidation:
    """Structural validation of sweep manifests."""

    def test_valid_manifest(self, valid_manifest_data: dict[str, Any]) -> None:
        assert validate_manifest_dict(valid_manifest_data) is valid_manifest_data

    def test_unknown_axis(self, valid_manifest_data: dict[str, Any]) -> None:
        valid_manifest_data["axis"] = "width"
        with pytest.raises(ConfigError) as exc_info:
            validate_manifest_dict(valid_manifest_data, file_path="sweep.yaml")
        assert "sweep.yaml" in str(exc_info.value)
        assert exc_info.value.errors
