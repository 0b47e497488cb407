"""Error hierarchy of matscale.

Every error carries a human-readable ``message`` plus the context attributes a
caller needs to report it (the offending field, file, line, shapes or
checkpoint). :func:`matscale.cli.utils.handle_cli_error` maps the classes to
process exit codes.
"""

from __future__ import annotations

from typing import Any

from pydantic import ValidationError as PydanticValidationErrorBase


class MatscaleError(Exception):
    """Base class of all matscale errors.

    Attributes:
        message: Human-readable error message.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ContractError(MatscaleError):
    """A caller broke an operation's precondition.

    Examples are a backward pass on a non-scalar tensor, a split fraction
    outside (0, 1], or a power-law fit with fewer than three points.

    Attributes:
        details: Structured context of the violation, e.g. ``{"field": "index"}``.
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.details = details or {}


class DimensionError(ContractError):
    """Tensor shapes are incompatible; ``shapes`` lists them in operand order."""

    def __init__(self, message: str, shapes: tuple[tuple[int, ...], ...] = ()) -> None:
        super().__init__(message, {"shapes": [list(s) for s in shapes]})
        self.shapes = shapes


class DomainError(ContractError):
    """Atomic number outside the element embedding table."""


class GraphStateError(MatscaleError):
    """A computation graph was used in an invalid state.

    Raised for a second backward pass over a consumed graph and for
    operations mixing tensors of two engines.
    """


class NumericError(MatscaleError):
    """Singular cell or non-finite training loss.

    Attributes:
        checkpoint_path: Diagnostic checkpoint written before training aborted.
    """

    def __init__(self, message: str, checkpoint_path: str | None = None) -> None:
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


class ConfigError(MatscaleError):
    """Invalid model, training, sweep or command-line settings.

    Attributes:
        field: Dotted path of the first offending field, if known.
        errors: Per-field details as produced by :func:`format_pydantic_errors`.
    """

    def __init__(
        self,
        message: str,
        field: str | None = None,
        errors: list[dict[str, Any]] | None = None,
    ) -> None:
        super().__init__(message)
        self.field = field
        self.errors = errors or []


class DataLoadError(MatscaleError):
    """A dataset, manifest or run file cannot be read or parsed.

    Raised for missing or unreadable files, malformed JSON lines and records
    failing schema or invariant checks.

    Attributes:
        original_error: Underlying exception, if any.
        file_path: File being read.
        line_number: 1-based line of the offending record.
        field: Offending record field, if known.
    """

    def __init__(
        self,
        message: str,
        original_error: Exception | None = None,
        file_path: str | None = None,
        line_number: int | None = None,
        field: str | None = None,
    ) -> None:
        super().__init__(message)
        self.original_error = original_error
        self.file_path = file_path
        self.line_number = line_number
        self.field = field


class CheckpointError(MatscaleError):
    """Unreadable checkpoint, bad magic or unsupported format version.

    Attributes:
        file_path: Checkpoint file.
        version: Format version found in the preamble, when it could be read.
    """

    def __init__(
        self,
        message: str,
        file_path: str | None = None,
        version: int | None = None,
    ) -> None:
        super().__init__(message)
        self.file_path = file_path
        self.version = version


def format_pydantic_errors(
    error: PydanticValidationErrorBase, prefix: str = "Validation failed"
) -> tuple[str, list[dict[str, Any]]]:
    """Turn a pydantic validation error into a message and per-field details.

    Args:
        error: The pydantic ``ValidationError``.
        prefix: First line of the message.

    Returns:
        ``(message, details)``; each detail has the dotted ``field`` path, the
        ``message`` and the pydantic error ``type``. Errors on the whole model
        are reported under ``<record>``.

    Examples:
        >>> try:
        ...     TrainConfig.model_validate({"batch_size": 0})
        ... except ValidationError as e:
        ...     message, details = format_pydantic_errors(e)
        >>> details[0]["field"]
        'batch_size'
    """
    details = [
        {
            "field": ".".join(str(loc) for loc in err["loc"]) or "<record>",
            "message": err["msg"],
            "type": err["type"],
        }
        for err in error.errors()
    ]
    lines = [f"  - {d['field']}: {d['message']}" for d in details]
    return "\n".join([f"{prefix}:", *lines]), details
