"""JSONL loading and emission for material datasets."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

from matscale.data.records import MaterialRecord
from matscale.exceptions import DataLoadError

logger = logging.getLogger(__name__)


def _read_lines(file_path: Path) -> list[str]:
    """Read a UTF-8 file into lines, mapping I/O failures to DataLoadError."""
    try:
        with open(file_path, encoding="utf-8") as f:
            return f.read().split("\n")
    except FileNotFoundError as e:
        raise DataLoadError(
            f"Dataset file not found: {file_path}",
            original_error=e,
            file_path=str(file_path),
        ) from e
    except PermissionError as e:
        raise DataLoadError(
            f"Permission denied reading dataset file: {file_path}",
            original_error=e,
            file_path=str(file_path),
        ) from e
    except UnicodeDecodeError as e:
        raise DataLoadError(
            f"Failed to decode dataset file (expected UTF-8): {file_path}. Error: {str(e)}",
            original_error=e,
            file_path=str(file_path),
        ) from e


def parse_record_line(line: str, file_path: str | None = None, line_number: int | None = None) -> MaterialRecord:
    """Parse and validate one JSONL line.

    Raises:
        DataLoadError: If the line is not a JSON object or fails validation.
    """
    # Deferred: the validator imports the record model from this package
    from matscale.validator import validate_material_dict

    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise DataLoadError(
            f"{file_path or '<input>'}, line {line_number}: malformed JSON ({e.msg})",
            original_error=e,
            file_path=file_path,
            line_number=line_number,
        ) from e
    return validate_material_dict(data, file_path=file_path, line_number=line_number)


def _numbered_lines(lines: list[str]) -> list[tuple[int, str]]:
    return [(number, line) for number, line in enumerate(lines, start=1) if line.strip()]


def load_jsonl(file_path: str | Path) -> list[MaterialRecord]:
    """Load every material record from a JSONL file.

    Blank lines are skipped; line numbers in errors count physical lines.

    Args:
        file_path: Path to a UTF-8 JSONL file, one material per line.

    Returns:
        Validated records in file order. An empty file yields an empty list.

    Raises:
        DataLoadError: If the file cannot be read, or a line is malformed or
            invalid. The error names the 1-indexed line and the field.

    Examples:
        >>> records = load_jsonl("data/lj_small.jsonl")
        >>> records[0].n_atoms
        4
    """
    path = Path(file_path)
    records = [
        parse_record_line(line, str(path), number) for number, line in _numbered_lines(_read_lines(path))
    ]
    logger.info(f"Loaded {len(records)} records from {path}")
    return records


def dump_jsonl(records: Iterable[MaterialRecord], file_path: str | Path) -> Path:
    """Write records as JSONL (LF line endings, UTF-8).

    Floats are written with their shortest round-trip representation, so
    :func:`load_jsonl` returns records equal to the ones written.
    """
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record.to_json_dict(), separators=(",", ":")))
            f.write("\n")
            count += 1
    logger.info(f"Wrote {count} records to {path}")
    return path


class JsonlDataset:
    """File-backed dataset that parses its JSONL source on every iteration.

    Only the raw lines are held in memory; records are rebuilt per pass, which
    is what :func:`matscale.data.cache.cache` avoids.

    Attributes:
        path: Source file.
        parse_passes: Number of completed or started parsing passes.
    """

    def __init__(self, file_path: str | Path, indices: Sequence[int] | None = None) -> None:
        self.path = Path(file_path)
        self._lines = _numbered_lines(_read_lines(self.path))
        self._indices = list(range(len(self._lines))) if indices is None else list(indices)
        for index in self._indices:
            if not 0 <= index < len(self._lines):
                raise IndexError(f"Record index {index} out of range for {self.path}")
        self.parse_passes = 0

    @property
    def name(self) -> str:
        return self.path.name

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self) -> Iterator[MaterialRecord]:
        self.parse_passes += 1
        logger.debug(f"Parsing pass {self.parse_passes} over {self.path}")
        for index in self._indices:
            number, line = self._lines[index]
            yield parse_record_line(line, str(self.path), number)

    def subset(self, indices: Sequence[int]) -> JsonlDataset:
        """Dataset view over the given positions of this dataset, still file-backed."""
        view = JsonlDataset.__new__(JsonlDataset)
        view.path = self.path
        view._lines = self._lines
        view._indices = [self._indices[i] for i in indices]
        view.parse_passes = 0
        return view

    def __repr__(self) -> str:
        return f"JsonlDataset(path={str(self.path)!r}, records={len(self)})"
