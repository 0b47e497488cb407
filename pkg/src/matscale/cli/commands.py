"""CLI commands for matscale.

This module implements the generate, stats, train, sweep, fit, infer and viz
commands.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import click

from matscale.cli.options import (
    CliConfig,
    baseline_option,
    config_from_params,
    data_options,
    model_options,
    out_dir_option,
    synthetic_options,
    train_options,
)
from matscale.cli.utils import echo_table, handle_cli_error
from matscale.data.loader import JsonlDataset, dump_jsonl, load_jsonl
from matscale.data.records import MaterialRecord
from matscale.data.split import DatasetSplit, split
from matscale.data.stats import summary_stats
from matscale.data.synthetic import generate_synthetic
from matscale.exceptions import ContractError
from matscale.models.factory import build_model, count_params, parameter_memory_bytes
from matscale.scaling.diagnostics import evaluate_baseline
from matscale.scaling.frontier import frontier_points
from matscale.scaling.io import (
    FITS_FILE,
    RUNS_FILE,
    load_manifest,
    read_fits,
    read_runs,
    write_fits,
)
from matscale.scaling.pareto import pareto_frontier
from matscale.scaling.sweep import axis_points, fit_sweep, run_sweep
from matscale.scaling.types import AXIS_SYMBOLS, PowerLawFit
from matscale.tensor import Engine
from matscale.training.inference import infer, load_model
from matscale.training.records import RunRecord
from matscale.training.trainer import train
from matscale.viz.loglog import Curve, write_loglog_plot
from matscale.viz.panel import render_material_panel

logger = logging.getLogger(__name__)


def _current_config(name: str) -> CliConfig:
    """Validate the parameters of the running command before any work starts."""
    return config_from_params(name, click.get_current_context().params)


def _synthetic(config: CliConfig) -> list[MaterialRecord]:
    atoms = (config.atoms_min, config.atoms_max)
    return generate_synthetic(config.n_materials, atoms, seed=config.data_seed)


def _source(config: CliConfig) -> Any:
    """Records named by ``--data``, or a synthetic set when no file is given."""
    if config.data is not None:
        return JsonlDataset(config.data)
    return _synthetic(config)


def _split(config: CliConfig) -> DatasetSplit:
    source = _source(config)
    name = config.data.name if config.data is not None else "synthetic"
    return split(source, config.train_frac, config.val_frac, config.split_seed, source_name=name)


def _material(path: Path, index: int) -> MaterialRecord:
    records = load_jsonl(path)
    if index >= len(records):
        raise ContractError(
            f"Record index {index} out of range for {len(records)} records", {"field": "index"}
        )
    return records[index]


def _loss_text(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


@click.command(name="generate")
@synthetic_options
@click.option(
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="JSONL file to write.",
)
def generate_command(**params: Any) -> None:
    """Generate a synthetic Lennard-Jones dataset as JSONL.

    Examples:

        \b
        # 1000 materials with 2 to 8 atoms each
        matscale generate --n-materials 1000 --output data.jsonl
    """
    try:
        config = _current_config("generate")
        assert config.output is not None
        records = _synthetic(config)
        dump_jsonl(records, config.output)
        click.echo(f"✓ Wrote {len(records)} materials to {config.output}")
    except Exception as e:
        handle_cli_error(e, str(params.get("output")))


@click.command(name="stats")
@data_options
@synthetic_options
@baseline_option
def stats_command(**params: Any) -> None:
    """Print summary statistics and the naive baseline loss of a dataset."""
    try:
        config = _current_config("stats")
        data_split = _split(config)
        stats = summary_stats(data_split.train)
        click.echo(f"Train records: {data_split.n_train}  Validation records: {data_split.n_val}")
        echo_table(
            [(name, f"{mean:.6g}", f"{std:.6g}", str(n)) for name, mean, std, n in stats.rows()],
            ("channel", "mean", "std", "count"),
        )
        report = evaluate_baseline(data_split, config.baseline_mode)
        rows = [("train", report.train)] + ([("val", report.val)] if report.val is not None else [])
        click.echo(f"\nBaseline ({report.mode}):")
        echo_table(
            [
                (
                    side,
                    f"{b.total:.6g}",
                    f"{b.energy_term:.6g}",
                    f"{b.force_term:.6g}",
                    f"{b.iso_term:.6g}",
                    f"{b.aniso_term:.6g}",
                )
                for side, b in rows
            ],
            ("split", "total", "energy", "force", "iso", "aniso"),
        )
    except Exception as e:
        handle_cli_error(e, str(params["data"]) if params.get("data") else None)


@click.command(name="train")
@data_options
@synthetic_options
@train_options
@model_options
@baseline_option
@out_dir_option
def train_command(**params: Any) -> None:
    """Train a model and write its CSV log and checkpoints.

    Writes ``run.csv``, ``checkpoint_epoch<k>.msck`` at each validation,
    ``viz_epoch<k>.svg`` at each visualization and ``final.msck`` under
    ``--out-dir``.

    Examples:

        \b
        # Defaults: batch size 32, 50 epochs, max LR 6e-4, gradient clip 100
        matscale train --data data.jsonl --out-dir runs/base

        \b
        # Train on 10% of the file with four data-parallel workers
        matscale train --data data.jsonl --train-frac 0.1 --workers 4
    """
    try:
        config = _current_config("train")
        assert config.train is not None and config.model is not None
        data_split = _split(config)
        is_baseline = config.model.model_kind == "baseline_mode"
        stats = summary_stats(data_split.train) if is_baseline else None
        model = build_model(config.model, Engine(config.train.precision), stats)
        click.echo(
            f"Training {config.model.label()} ({count_params(model)} parameters, "
            f"{parameter_memory_bytes(model)} bytes) on D={data_split.n_train}"
        )
        record, _ = train(model, data_split, config.train, run_id=config.out_dir.name or "run")
        csv_path = record.write_csv(config.out_dir / "run.csv")
        click.echo(
            f"✓ {record.status}: {len(record.steps)} steps, C={record.total_flops:.4g} FLOPs"
        )
        if record.best_val is not None:
            click.echo(f"  Best validation loss: {record.best_val:.6g}")
        click.echo(f"  Log: {csv_path}")
        click.echo(f"  Checkpoint: {config.out_dir / 'final.msck'}")
    except Exception as e:
        handle_cli_error(e, str(params["data"]) if params.get("data") else None)


@click.command(name="sweep")
@click.option(
    "--manifest",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Sweep manifest (YAML or JSON).",
)
@out_dir_option
def sweep_command(**params: Any) -> None:
    """Run every cell of a sweep manifest and write ``runs.json``.

    Examples:

        \b
        matscale sweep --manifest sweeps/data.yaml --out-dir runs/data
    """
    try:
        config = _current_config("sweep")
        assert config.manifest is not None
        spec = load_manifest(config.manifest)
        records = run_sweep(spec, config.out_dir)
        rows = [(r.run_id, r.status, _loss_text(r.best_val), ",".join(r.tags)) for r in records]
        echo_table(rows, ("run", "status", "best_val", "tags"))
        click.echo(f"✓ Wrote {config.out_dir / RUNS_FILE}")
    except Exception as e:
        handle_cli_error(e, str(params.get("manifest")))


def _runs_dir(config: CliConfig) -> Path:
    return config.runs_dir if config.runs_dir is not None else config.out_dir


@click.command(name="fit")
@click.option(
    "--runs-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory holding runs.json (default: --out-dir).",
)
@click.option(
    "--burn-in",
    type=click.IntRange(min=0),
    default=2,
    show_default=True,
    help="Early validations dropped from compute fits.",
)
@click.option(
    "--loss",
    type=click.Choice(["best", "final"]),
    default="best",
    show_default=True,
    help="Validation loss fitted on data and params axes.",
)
@click.option("--include-flagged", is_flag=True, default=False, help="Keep runs tagged anomalous.")
@out_dir_option
def fit_command(**params: Any) -> None:
    """Fit power laws to a finished sweep and write ``fits.json``.

    Re-running on the same directory rewrites an identical file.
    """
    try:
        config = _current_config("fit")
        runs_dir = _runs_dir(config)
        records = read_runs(runs_dir / RUNS_FILE)
        fits = fit_sweep(
            records, config.burn_in, config.loss, exclude_flagged=not config.include_flagged
        )
        path = write_fits(fits, config.out_dir / FITS_FILE)
        for fit in fits:
            click.echo(f"  {fit.loss_kind}: {fit.legend()}")
        click.echo(f"✓ Wrote {len(fits)} fits to {path}")
    except Exception as e:
        handle_cli_error(e, str(params.get("runs_dir") or params.get("out_dir") or ""))


@click.command(name="infer")
@click.option(
    "--checkpoint",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Checkpoint file.",
)
@click.option(
    "--data",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSONL file with the material.",
)
@click.option(
    "--index",
    type=click.IntRange(min=0),
    default=0,
    show_default=True,
    help="Record position in the file.",
)
@click.option(
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Optional SVG panel of actual vs predicted.",
)
def infer_command(**params: Any) -> None:
    """Predict energy, forces and stress for one material."""
    try:
        config = _current_config("infer")
        assert config.checkpoint is not None and config.data is not None
        material = _material(config.data, config.index)
        prediction, metrics = infer(config.checkpoint, material)
        click.echo(f"Energy: {prediction.energy:.6f} eV (label {material.energy:.6f})")
        echo_table([(name, f"{value:.6g}") for name, value in metrics.items()], ("metric", "value"))
        if config.output is not None:
            config.output.parent.mkdir(parents=True, exist_ok=True)
            config.output.write_text(render_material_panel(material, prediction), encoding="utf-8")
            click.echo(f"✓ Wrote {config.output}")
    except Exception as e:
        handle_cli_error(e, str(params.get("checkpoint")))


def _axis_curves(
    records: list[RunRecord], axis: str, fits: list[PowerLawFit]
) -> tuple[list[Curve], PowerLawFit | None]:
    symbol = AXIS_SYMBOLS[axis]
    fit = next((f for f in fits if f.axis == symbol and f.loss_kind != "frontier_train"), None)
    if axis == "compute":
        curves = [
            Curve(
                r.run_id,
                [(v.flops, v.loss.total) for v in r.validations if min(v.flops, v.loss.total) > 0],
            )
            for r in records
            if r.status != "failed"
        ]
        curves = [c for c in curves if c.points]
        observed = [p for p in frontier_points(records, 0) if p.flops > 0 and p.loss > 0]
        if observed:
            curves.append(Curve("frontier", [(p.flops, p.loss) for p in pareto_frontier(observed)]))
        return curves, fit
    points, _ = axis_points(records, exclude_tags=())
    return ([Curve(f"median best validation ({symbol})", points)] if points else []), fit


@click.command(name="viz")
@click.option(
    "--runs-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory holding runs.json (default: --out-dir).",
)
@click.option(
    "--checkpoint",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Checkpoint for a material panel.",
)
@click.option(
    "--data",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="JSONL file with the material to draw.",
)
@click.option(
    "--index",
    type=click.IntRange(min=0),
    default=0,
    show_default=True,
    help="Record position in the file.",
)
@out_dir_option
def viz_command(**params: Any) -> None:
    """Write log-log plots of a sweep and, optionally, a material panel.

    For every axis in ``runs.json`` this writes ``loglog_<axis>.svg`` and a
    CSV of the plotted points, overlaying the fit from ``fits.json`` when
    present. With ``--checkpoint`` and ``--data`` it also writes
    ``panel_<index>.svg``.
    """
    try:
        config = _current_config("viz")
        runs_dir = _runs_dir(config)
        written: list[Path] = []
        if (runs_dir / RUNS_FILE).exists():
            records = read_runs(runs_dir / RUNS_FILE)
            fits = read_fits(runs_dir / FITS_FILE) if (runs_dir / FITS_FILE).exists() else []
            for axis in ("data", "params", "compute"):
                group = [r for r in records if r.axis == axis]
                curves, fit = _axis_curves(group, axis, fits)
                if not curves:
                    continue
                label = f"{axis} ({AXIS_SYMBOLS[axis]})"
                path = config.out_dir / f"loglog_{axis}.svg"
                written += write_loglog_plot(path, curves, label, fit)
        if config.checkpoint is not None and config.data is not None:
            material = _material(config.data, config.index)
            model = load_model(config.checkpoint)
            prediction, _ = infer(model, material)
            path = config.out_dir / f"panel_{config.index}.svg"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(render_material_panel(material, prediction), encoding="utf-8")
            written.append(path)
        if not written:
            raise ContractError(
                f"Nothing to plot: no {RUNS_FILE} in {runs_dir} and no --checkpoint/--data pair"
            )
        for path in written:
            click.echo(f"✓ Wrote {path}")
    except Exception as e:
        handle_cli_error(e, str(params.get("runs_dir") or ""))
