"""Sweeps over one scaling axis and the fits drawn from them."""

from __future__ import annotations

import logging
import statistics
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal, NamedTuple

from matscale.config import get_settings
from matscale.data.cache import cache
from matscale.data.loader import load_jsonl
from matscale.data.records import MaterialRecord
from matscale.data.split import DatasetSplit, split
from matscale.data.stats import summary_stats
from matscale.data.synthetic import generate_synthetic
from matscale.exceptions import ConfigError, ContractError
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model, count_params
from matscale.scaling.diagnostics import (
    ANOMALOUS_TAG,
    DEGENERATE_TAG,
    detect_zero_force_collapse,
    evaluate_baseline,
)
from matscale.scaling.fit import MIN_FIT_POINTS, fit_power_law, flag_anomalies
from matscale.scaling.frontier import DEFAULT_BURN_IN, frontier_fit
from matscale.scaling.io import RUNS_FILE, write_runs
from matscale.scaling.types import AXIS_SYMBOLS, PowerLawFit, SweepSpec
from matscale.tensor import Engine
from matscale.training.records import RunRecord
from matscale.training.trainer import train

logger = logging.getLogger(__name__)


class SweepCell(NamedTuple):
    """One training run of a sweep."""

    index: int
    run_id: str
    axis_value: int
    model: ModelConfig
    n_train: int
    seed: int


def load_sweep_records(spec: SweepSpec) -> list[MaterialRecord]:
    """Records named by the sweep's dataset section (a file or a synthetic set)."""
    source = spec.dataset
    if source.path is not None:
        return load_jsonl(source.path)
    return generate_synthetic(source.n_materials, (source.atoms_min, source.atoms_max), seed=source.seed)


def plan_cells(spec: SweepSpec, n_train: int) -> list[SweepCell]:
    """Expand grid values and repetitions into cells, in grid order.

    Raises:
        ConfigError: If a record count exceeds the training split, or the
            model sizes of a params sweep are not strictly increasing.
    """
    cells: list[SweepCell] = []
    seeds = spec.seeds()
    sizes: list[int] = []
    for value in spec.grid:
        if isinstance(value, ModelConfig):
            model, d = value, n_train
            axis_value = count_params(build_model(value, Engine()))
            sizes.append(axis_value)
        else:
            model, d, axis_value = spec.model, int(value), int(value)
            if d > n_train:
                raise ConfigError(
                    f"Grid value {d} exceeds the {n_train} available training records", field="grid"
                )
        for rep, seed in enumerate(seeds):
            run_id = f"{spec.axis}_{axis_value}_{seed}"
            if spec.seed_policy == "fixed" and spec.repetitions > 1:
                run_id += f"_r{rep}"
            cell_model = model.model_copy(update={"init_seed": model.init_seed + (seed - spec.seed)})
            cells.append(SweepCell(len(cells), run_id, axis_value, cell_model, d, seed))
    if spec.axis == "params" and any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError(f"Model sizes must be strictly increasing along the grid, got {sizes}", field="grid")
    return cells


def _cell_split(full: DatasetSplit, n_train: int) -> DatasetSplit:
    if n_train == full.n_train:
        return full
    indices = list(range(n_train))
    source = full.train
    train = source.subset(indices) if hasattr(source, "subset") else [source[i] for i in indices]
    return DatasetSplit(
        train=train,
        val=full.val,
        meta=full.meta,
        train_indices=full.train_indices[:n_train],
        val_indices=full.val_indices,
    )


def _run_cell(spec: SweepSpec, cell: SweepCell, full: DatasetSplit, out_dir: Path | None) -> RunRecord:
    logger.info(f"Sweep cell {cell.run_id}: starting (D={cell.n_train}, seed={cell.seed})")
    cell_split = _cell_split(full, cell.n_train)
    try:
        stats = summary_stats(cell_split.train) if cell.model.model_kind == "baseline_mode" else None
        model = build_model(cell.model, Engine(spec.train.precision), stats)
        config = spec.train.model_copy(
            update={"seed": cell.seed, "out_dir": out_dir / cell.run_id if out_dir is not None else None}
        )
        record, _ = train(model, cell_split, config, run_id=cell.run_id)
    except Exception as e:
        logger.error(f"Sweep cell {cell.run_id} failed: {e}")
        record = RunRecord(
            run_id=cell.run_id,
            model=cell.model.model_dump(mode="json"),
            train=spec.train.model_dump(mode="json"),
            dataset_size=cell.n_train,
            status="failed",
            failure=f"{type(e).__name__}: {e}",
        )
    record.axis = spec.axis
    record.axis_value = float(cell.axis_value)
    record.seed = cell.seed
    logger.info(f"Sweep cell {cell.run_id}: {record.status}, best val {record.best_val}")
    return record


def _tag_anomalies(records: Sequence[RunRecord]) -> None:
    scored = [r for r in records if r.status != "failed" and r.best_val is not None and r.best_val > 0]
    points = [(r.axis_value or 0.0, r.best_val or 0.0) for r in scored]
    if len({n for n, _ in points}) < 2:
        return
    for index in flag_anomalies(points):
        scored[index].tags.append(ANOMALOUS_TAG)


def run_sweep(
    spec: SweepSpec,
    out_dir: str | Path | None = None,
    records: Sequence[MaterialRecord] | None = None,
) -> list[RunRecord]:
    """Train every cell of ``spec`` and return the run records in grid order.

    All cells share one train/validation split of the source. Data cells
    train on nested prefixes of the training split. A failing cell yields a
    ``failed`` record and the sweep continues. Runs whose validation force
    term sits at the zero-force baseline are tagged ``degenerate``; runs
    whose loss is an outlier from a provisional fit are tagged ``anomalous``.

    Args:
        spec: The sweep.
        out_dir: Where per-cell CSVs, checkpoints and ``runs.json`` go.
        records: Records to use instead of the manifest's dataset section.

    Raises:
        ConfigError: If the grid does not fit the available data.
    """
    source = list(records) if records is not None else load_sweep_records(spec)
    full = split(source, spec.train_fraction, spec.val_fraction, spec.dataset.seed, source_name=spec.name)
    if spec.train.cache:
        full = DatasetSplit(cache(full.train), cache(full.val), full.meta, full.train_indices, full.val_indices)
    cells = plan_cells(spec, full.n_train)
    out = Path(out_dir) if out_dir is not None else None

    parallel = max(1, min(spec.max_parallel, len(cells)))
    cap = get_settings().max_workers
    if cap is not None and cap < parallel:
        logger.info(f"MATSCALE_WORKERS={cap} caps max_parallel={spec.max_parallel} of sweep '{spec.name}'")
        parallel = cap
    logger.info(f"Sweep '{spec.name}': {len(cells)} cells on the {spec.axis} axis, {parallel} at a time")
    with ThreadPoolExecutor(max_workers=parallel, thread_name_prefix="matscale-sweep") as pool:
        results = list(pool.map(lambda cell: _run_cell(spec, cell, full, out), cells))

    if full.n_val:
        baseline_force = evaluate_baseline(full, "all_zero", spec.train.loss_weights).val
        for record in results:
            if baseline_force is not None and detect_zero_force_collapse(record, baseline_force.force_term):
                record.tags.append(DEGENERATE_TAG)
    if spec.axis != "compute":
        _tag_anomalies(results)

    if out is not None:
        for record in results:
            record.write_csv(out / f"run_{record.run_id}.csv")
        write_runs(results, out / RUNS_FILE)
    failed = sum(r.status == "failed" for r in results)
    logger.info(f"Sweep '{spec.name}' finished: {len(results) - failed} completed, {failed} failed")
    return results


def axis_points(
    records: Sequence[RunRecord],
    loss: Literal["best", "final"] = "best",
    exclude_tags: Sequence[str] = (ANOMALOUS_TAG,),
) -> tuple[list[tuple[float, float]], list[str]]:
    """Median loss per axis value over repetitions, and the excluded run ids."""
    grouped: dict[float, list[float]] = {}
    excluded: list[str] = []
    for record in records:
        if record.status == "failed" or record.axis_value is None:
            continue
        if set(record.tags) & set(exclude_tags):
            excluded.append(record.run_id)
            continue
        value = record.best_val if loss == "best" else (record.final_val.total if record.final_val else None)
        if value is not None:
            grouped.setdefault(record.axis_value, []).append(value)
    points = [(n, statistics.median(losses)) for n, losses in sorted(grouped.items())]
    return points, sorted(excluded)


def fit_sweep(
    records: Sequence[RunRecord],
    burn_in: int = DEFAULT_BURN_IN,
    loss: Literal["best", "final"] = "best",
    exclude_flagged: bool = True,
) -> list[PowerLawFit]:
    """Fit every axis present in ``records``.

    Data and params runs are fitted on the median best (or final)
    validation loss per grid value; compute runs give a validation and a
    train frontier fit. Axes with too few points are skipped with a warning.
    """
    fits: list[PowerLawFit] = []
    exclude_tags = (ANOMALOUS_TAG,) if exclude_flagged else ()
    for axis in ("data", "params", "compute"):
        group = [r for r in records if r.axis == axis]
        if not group:
            continue
        try:
            if axis == "compute":
                excluded = sorted(r.run_id for r in group if set(r.tags) & set(exclude_tags))
                fits.append(frontier_fit(group, burn_in, "val", exclude=excluded))
                fits.append(frontier_fit(group, burn_in, "train", exclude=excluded))
                continue
            points, excluded = axis_points(group, loss, exclude_tags)
            if len(points) < MIN_FIT_POINTS:
                raise ContractError(f"{len(points)} grid values have a validation loss")
            fit = fit_power_law(
                points,
                axis=AXIS_SYMBOLS[axis],
                loss_kind="best_val" if loss == "best" else "final_val",
                exclusions=excluded,
            )
            logger.info(f"{axis} axis: {fit.legend()}")
            fits.append(fit)
        except ContractError as e:
            logger.warning(f"Skipping {axis} fit: {e.message}")
    return fits
