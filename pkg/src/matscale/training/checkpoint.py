"""Versioned binary checkpoints.

Layout::

    b"MSCK"                      magic
    uint32 little-endian         format version
    uint64 little-endian         header length in bytes
    header                       UTF-8 JSON, sorted keys, compact separators
    parameter blocks             '<f8', declaration order
    first-moment blocks          '<f8', same order (when optimizer state exists)
    second-moment blocks         '<f8', same order

The header lists every block name and shape, so the file is self-describing.
Writing a loaded checkpoint reproduces the original bytes.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from matscale.exceptions import CheckpointError, ContractError
from matscale.models.baseline import BaselineModel
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model, count_params
from matscale.models.module import Model
from matscale.tensor import Engine, PrecisionMode
from matscale.training.config import TrainConfig
from matscale.training.records import RunRecord

logger = logging.getLogger(__name__)

MAGIC = b"MSCK"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sIQ")
_BLOCK_DTYPE = np.dtype("<f8")


@dataclass
class Checkpoint:
    """Everything needed to resume training or run inference.

    Attributes:
        model_config: Architecture of the saved model.
        train_config: Optimization settings of the run.
        params: Parameter arrays keyed by dotted name, in declaration order.
        opt_m, opt_v: Adam moments in parameter order (empty before the first step).
        opt_t: Adam step count.
        step: Optimizer steps completed.
        dataset_size: Training materials D.
        run_record: History up to ``step``.
        rng_state: Bit-generator state of the shuffling RNG.
        baseline: Constants of a baseline model, if the model is one.
    """

    model_config: ModelConfig
    train_config: TrainConfig
    params: dict[str, np.ndarray]
    opt_m: list[np.ndarray] = field(default_factory=list)
    opt_v: list[np.ndarray] = field(default_factory=list)
    opt_t: int = 0
    step: int = 0
    dataset_size: int = 0
    run_record: RunRecord = field(default_factory=RunRecord)
    rng_state: dict[str, Any] = field(default_factory=dict)
    baseline: dict[str, Any] | None = None

    @property
    def n_params(self) -> int:
        return self.run_record.n_params

    def header(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "model_config": self.model_config.model_dump(mode="json"),
            "train_config": self.train_config.model_dump(mode="json"),
            "n_params": self.n_params,
            "dataset_size": self.dataset_size,
            "step": self.step,
            "params": [[name, list(a.shape)] for name, a in self.params.items()],
            "optimizer": {"t": self.opt_t, "has_moments": bool(self.opt_m)},
            "run_record": self.run_record.model_dump(mode="json"),
            "rng_state": self.rng_state,
            "baseline": self.baseline,
        }


def capture(
    model: Model,
    train_config: TrainConfig,
    run_record: RunRecord,
    step: int = 0,
    optimizer: Any = None,
    rng: np.random.Generator | None = None,
) -> Checkpoint:
    """Snapshot a model, its optimizer and run state into a :class:`Checkpoint`."""
    baseline = None
    if isinstance(model, BaselineModel):
        baseline = {"energy": float(model.energy_value), "stress": np.asarray(model.stress_value).tolist()}
    return Checkpoint(
        model_config=model.config,
        train_config=train_config,
        params={name: np.asarray(a, dtype=np.float64) for name, a in model.state_arrays().items()},
        opt_m=[m.copy() for m in optimizer.m] if optimizer is not None and optimizer.t else [],
        opt_v=[v.copy() for v in optimizer.v] if optimizer is not None and optimizer.t else [],
        opt_t=optimizer.t if optimizer is not None else 0,
        step=step,
        dataset_size=run_record.dataset_size,
        run_record=run_record.model_copy(deep=True),
        rng_state=_jsonable(rng.bit_generator.state) if rng is not None else {},
        baseline=baseline,
    )


def _jsonable(state: Any) -> Any:
    if isinstance(state, dict):
        return {k: _jsonable(v) for k, v in state.items()}
    if isinstance(state, np.ndarray):
        return state.tolist()
    if isinstance(state, np.integer):
        return int(state)
    return state


def to_bytes(checkpoint: Checkpoint) -> bytes:
    header = json.dumps(checkpoint.header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    blocks = list(checkpoint.params.values()) + checkpoint.opt_m + checkpoint.opt_v
    payload = b"".join(np.ascontiguousarray(b, dtype=_BLOCK_DTYPE).tobytes() for b in blocks)
    return _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)) + header + payload


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    """Write ``checkpoint`` to ``path``, creating parent directories.

    Raises:
        CheckpointError: If the file cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(to_bytes(checkpoint))
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint: {e}", file_path=str(path)) from e
    logger.info(f"Saved checkpoint at step {checkpoint.step} to {path}")
    return path


def from_bytes(data: bytes, file_path: str | None = None) -> Checkpoint:
    """Decode a checkpoint.

    Raises:
        CheckpointError: On a bad magic number, a format version mismatch or
            truncated content.
    """
    if len(data) < _PREAMBLE.size:
        raise CheckpointError("Checkpoint is truncated", file_path=file_path)
    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"Not a checkpoint (magic {magic!r})", file_path=file_path)
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"Checkpoint format version {version} is not supported (expected {FORMAT_VERSION})",
            file_path=file_path,
            version=version,
        )
    start = _PREAMBLE.size
    try:
        header = json.loads(data[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Corrupt checkpoint header: {e}", file_path=file_path, version=version) from e

    offset = start + header_len
    specs = [(name, tuple(shape)) for name, shape in header["params"]]

    def read_blocks() -> list[np.ndarray]:
        nonlocal offset
        arrays = []
        for _, shape in specs:
            count = int(np.prod(shape, dtype=np.int64))
            end = offset + count * _BLOCK_DTYPE.itemsize
            if end > len(data):
                raise CheckpointError("Checkpoint is truncated", file_path=file_path, version=version)
            arrays.append(np.frombuffer(data, dtype=_BLOCK_DTYPE, count=count, offset=offset).reshape(shape).copy())
            offset = end
        return arrays

    params = dict(zip([name for name, _ in specs], read_blocks(), strict=True))
    has_moments = header["optimizer"]["has_moments"]
    opt_m = read_blocks() if has_moments else []
    opt_v = read_blocks() if has_moments else []
    if offset != len(data):
        raise CheckpointError(
            f"Checkpoint has {len(data) - offset} unexpected trailing bytes",
            file_path=file_path,
            version=version,
        )
    return Checkpoint(
        model_config=ModelConfig.model_validate(header["model_config"]),
        train_config=TrainConfig.model_validate(header["train_config"]),
        params=params,
        opt_m=opt_m,
        opt_v=opt_v,
        opt_t=header["optimizer"]["t"],
        step=header["step"],
        dataset_size=header["dataset_size"],
        run_record=RunRecord.model_validate(header["run_record"]),
        rng_state=header["rng_state"],
        baseline=header["baseline"],
    )


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint file.

    Raises:
        CheckpointError: If the file is missing, unreadable or malformed.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint: {e}", file_path=str(path)) from e
    checkpoint = from_bytes(data, file_path=str(path))
    logger.debug(f"Loaded checkpoint {path} (step {checkpoint.step})")
    return checkpoint


def restore_model(checkpoint: Checkpoint, engine: Engine | None = None) -> Model:
    """Rebuild the saved model with its parameter values.

    Raises:
        CheckpointError: If the stored parameters do not fit the stored config.
    """
    engine = engine or Engine(PrecisionMode(checkpoint.train_config.precision))
    if checkpoint.baseline is not None:
        constants = (checkpoint.baseline["energy"], np.asarray(checkpoint.baseline["stress"]))
        return BaselineModel(engine, checkpoint.model_config, constants=constants)
    model = build_model(checkpoint.model_config, engine)
    try:
        model.load_state_arrays(checkpoint.params)
    except ContractError as e:
        raise CheckpointError(f"Checkpoint parameters do not match the model: {e.message}") from e
    if checkpoint.run_record.n_params and count_params(model) != checkpoint.run_record.n_params:
        raise CheckpointError("Checkpoint parameter count does not match the rebuilt model")
    return model


def restore_rng(checkpoint: Checkpoint) -> np.random.Generator:
    """Shuffling RNG positioned where the run left off."""
    rng = np.random.default_rng(checkpoint.train_config.seed)
    if checkpoint.rng_state:
        rng.bit_generator.state = checkpoint.rng_state
    return rng
