"""JSON Schema definitions for material records and sweep manifests."""

from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml

SCHEMA_FILES = {
    "material_record": "material_record.yaml",
    "sweep_manifest": "sweep_manifest.yaml",
}


def _get_schema_path(name: str) -> Path:
    """Get the path to a schema file shipped with the package."""
    try:
        return Path(__file__).parent / SCHEMA_FILES[name]
    except KeyError:
        raise KeyError(f"Unknown schema: {name!r} (known: {sorted(SCHEMA_FILES)})") from None


@lru_cache(maxsize=len(SCHEMA_FILES))
def load_schema(name: str = "material_record") -> dict[str, Any]:
    """Load and return a schema definition.

    Args:
        name: Schema name, one of ``material_record`` or ``sweep_manifest``.

    Returns:
        Dictionary containing the JSON Schema definition.

    Raises:
        KeyError: If the schema name is unknown.
        FileNotFoundError: If the schema file does not exist.
        yaml.YAMLError: If the schema file is invalid YAML.
    """
    schema_path = _get_schema_path(name)
    if not schema_path.exists():
        raise FileNotFoundError(f"Schema file not found: {schema_path}")

    with open(schema_path, encoding="utf-8") as f:
        schema = yaml.safe_load(f)

    return schema  # type: ignore[no-any-return]


def get_schema_version(name: str = "material_record") -> str:
    """Get the version string declared at the top of a schema."""
    schema = load_schema(name)
    if "version" in schema:
        return str(schema["version"])
    raise KeyError(f"Schema version not defined for {name!r}")


__all__ = ["SCHEMA_FILES", "get_schema_version", "load_schema"]
