"""Validation utilities for material records and sweep manifests.

Validation happens in two passes, as for every document this package reads:
a structural pass against the JSON Schema shipped in :mod:`matscale.schema`,
then the pydantic model, which checks cross-field invariants (shape agreement,
stress symmetry, frac/cart consistency).
"""

from __future__ import annotations

from typing import Any

from jsonschema.exceptions import ValidationError as SchemaValidationError
from jsonschema.validators import Draft202012Validator
from pydantic import ValidationError as PydanticValidationErrorBase

from matscale.data.records import MaterialRecord
from matscale.exceptions import ConfigError, DataLoadError, format_pydantic_errors
from matscale.schema import load_schema

_validators: dict[str, Draft202012Validator] = {}


def _get_validator(schema_name: str) -> Draft202012Validator:
    validator = _validators.get(schema_name)
    if validator is None:
        validator = Draft202012Validator(load_schema(schema_name))
        _validators[schema_name] = validator
    return validator


def _error_field(error: SchemaValidationError) -> str:
    """Top-level field an error belongs to.

    ``required`` failures are reported on the parent object, so the missing
    property name is read from the validator arguments instead of the path.
    """
    if error.path:
        return str(error.path[0])
    if error.validator == "required" and isinstance(error.instance, dict):
        missing = [name for name in error.validator_value if name not in error.instance]
        if missing:
            return str(missing[0])
    if error.validator == "additionalProperties" and isinstance(error.instance, dict):
        allowed = set(error.schema.get("properties", {}))
        extra = sorted(name for name in error.instance if name not in allowed)
        if extra:
            return extra[0]
    return "<record>"


def collect_schema_errors(data: Any, schema_name: str = "material_record") -> list[dict[str, Any]]:
    """Validate ``data`` against a packaged schema and return every error.

    Args:
        data: Parsed JSON/YAML value.
        schema_name: Name of the schema to validate against.

    Returns:
        List of error dictionaries with ``field``, ``path``, ``message`` and
        ``validator`` keys, sorted by path. Empty when ``data`` is valid.
    """
    errors = []
    for error in sorted(_get_validator(schema_name).iter_errors(data), key=lambda e: list(map(str, e.path))):
        path_parts = [str(part) for part in error.path]
        errors.append(
            {
                "field": _error_field(error),
                "path": " -> ".join(path_parts) if path_parts else "root",
                "message": error.message,
                "validator": error.validator,
            }
        )
    return errors


def _location(file_path: str | None, line_number: int | None) -> str:
    if file_path is None and line_number is None:
        return "record"
    if line_number is None:
        return str(file_path)
    return f"{file_path or '<input>'}, line {line_number}"


def validate_material_dict(
    data: Any,
    file_path: str | None = None,
    line_number: int | None = None,
) -> MaterialRecord:
    """Validate one parsed JSON object and build a :class:`MaterialRecord`.

    Args:
        data: Parsed JSON object for one material.
        file_path: Source file, used in error messages.
        line_number: 1-indexed source line, used in error messages.

    Returns:
        Validated, immutable record.

    Raises:
        DataLoadError: If the structural or model validation fails. The error
            carries the file path, the line number and the first offending field.

    Examples:
        >>> validate_material_dict({"atomic_numbers": [1]})
        Traceback (most recent call last):
        ...
        matscale.exceptions.DataLoadError: record: field 'cart': 'cart' is a required property
    """
    where = _location(file_path, line_number)
    schema_errors = collect_schema_errors(data, "material_record")
    if schema_errors:
        first = schema_errors[0]
        raise DataLoadError(
            f"{where}: field '{first['field']}': {first['message']}",
            file_path=file_path,
            line_number=line_number,
            field=first["field"],
        )

    try:
        return MaterialRecord.model_validate(data)
    except PydanticValidationErrorBase as e:
        message, details = format_pydantic_errors(e, prefix=f"{where}: invalid record")
        field = details[0]["field"].split(".")[0] if details else None
        # Report the schema name for aliased fields
        field = {"cart_positions": "cart", "frac_positions": "frac"}.get(field or "", field)
        raise DataLoadError(
            f"{where}: field '{field}': {details[0]['message'] if details else message}",
            original_error=e,
            file_path=file_path,
            line_number=line_number,
            field=field,
        ) from e


def validate_manifest_dict(data: Any, file_path: str | None = None) -> dict[str, Any]:
    """Structurally validate a sweep manifest.

    Returns:
        The manifest dictionary, unchanged.

    Raises:
        ConfigError: If the manifest does not match the sweep manifest schema.
    """
    errors = collect_schema_errors(data, "sweep_manifest")
    if errors:
        source = f" {file_path}" if file_path else ""
        message = f"Sweep manifest{source} is invalid:\n" + "\n".join(
            f"  - {e['path']}: {e['message']}" for e in errors
        )
        raise ConfigError(message, field=errors[0]["field"], errors=errors)
    return data  # type: ignore[no-any-return]
