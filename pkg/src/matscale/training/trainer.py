"""Optimization loop shared by serial and data-parallel training.

One epoch shuffles the training split, takes one optimizer step per batch
and, on validation epochs, measures the validation loss and writes a
checkpoint. Learning rates follow :func:`lr_at_step` over the whole run and
gradients are clipped to a global norm before each Adam step.
"""

from __future__ import annotations

import logging
import math
import tempfile
import time
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import NamedTuple, Protocol

import numpy as np

from matscale.data.batching import collate, iter_batches
from matscale.data.cache import cache
from matscale.data.records import MaterialRecord
from matscale.data.split import DatasetSplit
from matscale.exceptions import ContractError, NumericError
from matscale.loss import LossBreakdown, LossWeights, batch_loss, breakdown_from_terms, structure_loss_terms
from matscale.models.factory import count_params, parameter_memory_bytes
from matscale.models.module import Model
from matscale.training.checkpoint import Checkpoint, capture, restore_rng, save_checkpoint
from matscale.training.config import TrainConfig
from matscale.training.optim import Adam, clip_gradients
from matscale.training.records import RunRecord, StepLog, ValidationLog
from matscale.training.schedule import lr_at_step

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 64


class TrainResult(NamedTuple):
    record: RunRecord
    checkpoint: Checkpoint


class StepGradients(NamedTuple):
    """Outcome of a forward/backward pass over one batch."""

    grads: list[np.ndarray]
    loss: LossBreakdown
    flops: int


class GradientStepper(Protocol):
    def compute(self, records: Sequence[MaterialRecord]) -> StepGradients: ...

    def sync(self) -> None: ...

    def close(self) -> None: ...


def batch_gradients(model: Model, records: Sequence[MaterialRecord], weights: LossWeights) -> StepGradients:
    """Mean loss of ``records`` and its gradient for every parameter of ``model``.

    Parameters the loss does not reach get zero gradients. FLOPs are the
    forward plus backward count charged to the model's engine.
    """
    engine = model.engine
    before = engine.flops.snapshot()
    batch = collate(records)
    pred = model(batch, training=True)
    total, terms = batch_loss(pred, batch, weights)
    breakdown = breakdown_from_terms(terms)
    by_param = engine.backward(total)
    model.zero_grad()
    grads = [
        np.asarray(by_param[p], dtype=np.float64) if p in by_param else np.zeros(p.shape)
        for p in model.parameters()
    ]
    return StepGradients(grads, breakdown, engine.flops.since(before).total)


class SerialStepper:
    """Computes gradients on the trained model itself."""

    def __init__(self, model: Model, weights: LossWeights) -> None:
        self.model = model
        self.weights = weights

    def compute(self, records: Sequence[MaterialRecord]) -> StepGradients:
        return batch_gradients(self.model, records, self.weights)

    def sync(self) -> None:
        pass

    def close(self) -> None:
        pass


def evaluate(
    model: Model,
    records: Sequence[MaterialRecord],
    weights: LossWeights,
    batch_size: int = EVAL_BATCH_SIZE,
) -> LossBreakdown:
    """Mean loss over ``records`` without updating or counting FLOPs.

    Raises:
        ContractError: If ``records`` is empty.
    """
    records = list(records)
    if not records:
        raise ContractError("Cannot evaluate on an empty record set")
    engine = model.engine
    sums = dict.fromkeys(("total", "energy", "force", "iso", "aniso"), 0.0)
    with engine.flops.suspended(), engine.no_grad():
        for group in iter_batches(records, batch_size):
            batch = collate(group)
            terms = structure_loss_terms(model(batch, training=False), batch, weights)
            for name in sums:
                sums[name] += float(np.sum(terms[name].data, dtype=np.float64))
    n = len(records)
    return LossBreakdown(
        total=sums["total"] / n,
        energy_term=sums["energy"] / n,
        force_term=sums["force"] / n,
        iso_term=sums["iso"] / n,
        aniso_term=sums["aniso"] / n,
    )


def _new_record(model: Model, split: DatasetSplit, config: TrainConfig, run_id: str) -> RunRecord:
    return RunRecord(
        run_id=run_id,
        model=model.config.model_dump(mode="json"),
        train=config.model_dump(mode="json"),
        optimizer=config.optimizer_label(),
        n_params=count_params(model),
        n_params_total=count_params(model, include_embeddings=True),
        param_memory_bytes=parameter_memory_bytes(model),
        dataset_size=split.n_train,
        seed=config.seed,
    )


def _write_panel(model: Model, records: Sequence[MaterialRecord], out_dir: Path, epoch: int) -> None:
    from matscale.viz.panel import render_material_panel

    material = records[0]
    with model.engine.flops.suspended():
        predicted = model.predict(material)
    path = out_dir / f"viz_epoch{epoch}.svg"
    path.write_text(render_material_panel(material, predicted), encoding="utf-8")
    logger.info(f"Wrote visualization {path}")


def _patience_state(validations: Sequence[ValidationLog]) -> tuple[float, int]:
    """Best validation total and validations since it last improved."""
    best, stale = math.inf, 0
    for val in validations:
        if val.loss.total < best:
            best, stale = val.loss.total, 0
        else:
            stale += 1
    return best, stale


def _abort_non_finite(
    model: Model,
    config: TrainConfig,
    record: RunRecord,
    step: int,
    optimizer: Adam,
    rng: np.random.Generator,
) -> NumericError:
    out_dir = config.out_dir or Path(tempfile.mkdtemp(prefix="matscale-"))
    path = out_dir / f"diagnostic_step{step}.msck"
    record.status = "failed"
    record.failure = f"non-finite training loss at step {step}"
    save_checkpoint(capture(model, config, record, step, optimizer, rng), path)
    logger.error(f"Training loss became non-finite at step {step}; diagnostic checkpoint {path}")
    return NumericError(f"Non-finite training loss at step {step}", checkpoint_path=str(path))


def fit_loop(
    model: Model,
    split: DatasetSplit,
    config: TrainConfig,
    stepper: GradientStepper,
    run_id: str = "run",
    resume: Checkpoint | None = None,
    on_epoch: Callable[[int, RunRecord], None] | None = None,
) -> TrainResult:
    """Run the epochs of ``config`` with gradients supplied by ``stepper``.

    Args:
        model: Master model; the optimizer updates its parameters.
        split: Train and validation records; ``len(split.train)`` is D.
        config: Optimization settings.
        stepper: Gradient source, serial or data-parallel.
        run_id: Identifier stored in the run record.
        resume: Checkpoint of an earlier run of the same model to continue.
        on_epoch: Called with ``(epoch, record)`` after every epoch.

    Raises:
        ContractError: If the training split is empty.
        NumericError: If the training loss becomes non-finite.
    """
    if split.n_train == 0:
        raise ContractError("Training split is empty")
    train_source = cache(split.train) if config.cache else split.train
    val_records = list(cache(split.val) if config.cache else split.val)
    steps_per_epoch = config.steps_per_epoch(split.n_train)
    total_steps = config.total_steps(split.n_train)
    optimizer = Adam(model.parameters(), config.adam_beta1, config.adam_beta2, config.adam_eps)

    if resume is not None:
        record = resume.run_record.model_copy(deep=True)
        if resume.opt_m:
            optimizer.load_state(resume.opt_m, resume.opt_v, resume.opt_t)
        rng = restore_rng(resume)
        step = resume.step
    else:
        record = _new_record(model, split, config, run_id)
        rng = np.random.default_rng(config.seed)
        step = 0
    start_epoch = step // steps_per_epoch + 1
    flops = record.total_flops
    best_val, stale = _patience_state(record.validations)
    if config.out_dir is not None:
        config.out_dir.mkdir(parents=True, exist_ok=True)

    logger.info(
        f"Training {model.config.label()} (P={record.n_params}) on D={split.n_train} for "
        f"{config.epochs} epochs, {total_steps} steps"
    )
    started = time.perf_counter()
    try:
        for epoch in range(start_epoch, config.epochs + 1):
            epoch_started = time.perf_counter()
            epoch_records = list(train_source)
            epoch_losses = []
            for group in iter_batches(epoch_records, config.batch_size, rng):
                result = stepper.compute(group)
                if not math.isfinite(result.loss.total):
                    raise _abort_non_finite(model, config, record, step, optimizer, rng)
                lr = lr_at_step(step, total_steps, config.max_lr)
                optimizer.step(clip_gradients(result.grads, config.grad_clip), lr)
                stepper.sync()
                flops += result.flops
                loss = result.loss
                record.append_step(
                    StepLog(
                        step=step,
                        epoch=epoch,
                        flops=flops,
                        lr=lr,
                        train_total=loss.total,
                        train_energy=loss.energy_term,
                        train_force=loss.force_term,
                        train_iso=loss.iso_term,
                        train_aniso=loss.aniso_term,
                    )
                )
                epoch_losses.append(loss.total)
                step += 1

            record.epoch_times.append(time.perf_counter() - epoch_started)
            message = f"Epoch {epoch}/{config.epochs}: train {np.mean(epoch_losses):.6g}"

            is_val_epoch = epoch % config.val_period_epochs == 0 or epoch == config.epochs
            if is_val_epoch and val_records:
                val = evaluate(model, val_records, config.loss_weights)
                record.validations.append(ValidationLog(step=step - 1, epoch=epoch, flops=flops, loss=val))
                record.steps[-1] = record.steps[-1].model_copy(update={"val_total": val.total})
                message += f", val {val.total:.6g}"
                if val.total < best_val:
                    best_val, stale = val.total, 0
                else:
                    stale += 1
                if config.out_dir is not None:
                    save_checkpoint(
                        capture(model, config, record, step, optimizer, rng),
                        config.out_dir / f"checkpoint_epoch{epoch}.msck",
                    )
            logger.info(f"{message} ({record.epoch_times[-1]:.2f}s)")

            if config.out_dir is not None and config.viz_period_epochs and epoch % config.viz_period_epochs == 0:
                _write_panel(model, val_records or epoch_records, config.out_dir, epoch)
            if on_epoch is not None:
                on_epoch(epoch, record)
            if config.early_stop_patience is not None and stale >= config.early_stop_patience:
                record.status = "early_stopped"
                logger.info(f"Early stopping after epoch {epoch}: no improvement in {stale} validations")
                break
    finally:
        stepper.close()

    record.wall_time += time.perf_counter() - started
    checkpoint = capture(model, config, record, step, optimizer, rng)
    if config.out_dir is not None:
        save_checkpoint(checkpoint, config.out_dir / "final.msck")
    return TrainResult(record, checkpoint)


def train(
    model: Model,
    split: DatasetSplit,
    config: TrainConfig,
    run_id: str = "run",
    resume: Checkpoint | None = None,
    on_epoch: Callable[[int, RunRecord], None] | None = None,
) -> TrainResult:
    """Train ``model`` on ``split`` and return its run record and final checkpoint.

    With ``config.workers > 1`` the run is delegated to
    :func:`~matscale.training.parallel.train_data_parallel`. A serial run in
    64-bit precision with a fixed seed is deterministic.

    Examples:
        >>> record, checkpoint = train(model, split, TrainConfig(epochs=1, batch_size=32))
        >>> len(record.steps)  # D = 64
        2
    """
    if config.workers > 1:
        from matscale.training.parallel import train_data_parallel

        return train_data_parallel(model, split, config, run_id=run_id, resume=resume, on_epoch=on_epoch)
    return fit_loop(model, split, config, SerialStepper(model, config.loss_weights), run_id, resume, on_epoch)
