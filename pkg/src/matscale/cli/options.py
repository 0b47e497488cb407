"""Option groups shared by the subcommands and the parsed CLI configuration."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any, Literal, TypeVar

import click
from pydantic import BaseModel, ConfigDict, Field, model_validator

from matscale.config import build_config, get_settings
from matscale.loss import LossWeights
from matscale.models.config import ModelConfig
from matscale.tensor import PrecisionMode
from matscale.training.config import TrainConfig

F = TypeVar("F", bound=Callable[..., Any])

Subcommand = Literal["generate", "stats", "train", "sweep", "fit", "infer", "viz"]


class CliConfig(BaseModel):
    """Validated configuration of one CLI invocation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    subcommand: Subcommand
    train: TrainConfig | None = None
    model: ModelConfig | None = None
    data: Path | None = None
    output: Path | None = None
    out_dir: Path = Field(default_factory=lambda: get_settings().out_dir)
    train_frac: float = Field(default=0.8, gt=0.0, le=1.0)
    val_frac: float = Field(default=0.2, gt=0.0, le=1.0)
    split_seed: int = 0
    n_materials: int = Field(default=100, ge=1)
    atoms_min: int = Field(default=2, ge=1)
    atoms_max: int = Field(default=8, ge=1)
    data_seed: int = 0
    manifest: Path | None = None
    checkpoint: Path | None = None
    runs_dir: Path | None = None
    index: int = Field(default=0, ge=0)
    burn_in: int = Field(default=2, ge=0)
    loss: Literal["best", "final"] = "best"
    include_flagged: bool = False
    baseline_mode: Literal["mean_energy_zero_force", "all_zero"] = "mean_energy_zero_force"

    @model_validator(mode="after")
    def _check_ranges(self) -> CliConfig:
        if self.train_frac + self.val_frac > 1.0 + 1e-12:
            total = self.train_frac + self.val_frac
            raise ValueError(f"train_frac + val_frac must not exceed 1, got {total}")
        if self.atoms_min > self.atoms_max:
            raise ValueError(f"atoms_min ({self.atoms_min}) exceeds atoms_max ({self.atoms_max})")
        return self


def _apply(options: list[Callable[[F], F]]) -> Callable[[F], F]:
    def decorator(func: F) -> F:
        for option in reversed(options):
            func = option(func)
        return func

    return decorator


_fraction = click.FloatRange(min=0.0, max=1.0, min_open=True)
_positive = click.FloatRange(min=0.0, min_open=True)
_weight = click.FloatRange(min=0.0)

data_options = _apply(
    [
        click.option(
            "--data",
            type=click.Path(path_type=Path),
            default=None,
            help="JSONL dataset of materials.",
        ),
        click.option(
            "--train-frac",
            type=_fraction,
            default=0.8,
            show_default=True,
            help="Fraction of records for training.",
        ),
        click.option(
            "--val-frac",
            type=_fraction,
            default=0.2,
            show_default=True,
            help="Fraction of records for validation.",
        ),
        click.option(
            "--split-seed",
            type=int,
            default=0,
            show_default=True,
            help="Seed of the train/validation split.",
        ),
    ]
)

synthetic_options = _apply(
    [
        click.option(
            "--n-materials",
            type=click.IntRange(min=1),
            default=100,
            show_default=True,
            help="Synthetic materials to generate.",
        ),
        click.option(
            "--atoms-min",
            type=click.IntRange(min=1),
            default=2,
            show_default=True,
            help="Fewest atoms per material.",
        ),
        click.option(
            "--atoms-max",
            type=click.IntRange(min=1),
            default=8,
            show_default=True,
            help="Most atoms per material.",
        ),
        click.option(
            "--data-seed",
            type=int,
            default=0,
            show_default=True,
            help="Seed of the synthetic generator.",
        ),
    ]
)

train_options = _apply(
    [
        click.option(
            "--batch-size",
            type=click.IntRange(min=1),
            default=32,
            show_default=True,
            help="Materials per optimizer step.",
        ),
        click.option(
            "--epochs",
            type=click.IntRange(min=1),
            default=50,
            show_default=True,
            help="Passes over the training split.",
        ),
        click.option(
            "--max-lr", type=_positive, default=6e-4, show_default=True, help="Peak learning rate."
        ),
        click.option(
            "--grad-clip",
            type=_positive,
            default=100.0,
            show_default=True,
            help="Global gradient-norm bound.",
        ),
        click.option(
            "--val-period",
            type=click.IntRange(min=1),
            default=2,
            show_default=True,
            help="Epochs between validations.",
        ),
        click.option(
            "--viz-period",
            type=click.IntRange(min=0),
            default=5,
            show_default=True,
            help="Epochs between visualizations (0 disables).",
        ),
        click.option(
            "--workers",
            type=click.IntRange(min=1),
            default=1,
            show_default=True,
            help="Data-parallel workers.",
        ),
        click.option(
            "--mixed-precision/--no-mixed-precision",
            default=False,
            show_default=True,
            help="Train with 32-bit tensors.",
        ),
        click.option(
            "--cache/--no-cache",
            default=False,
            show_default=True,
            help="Keep parsed records in memory across epochs.",
        ),
        click.option(
            "--seed",
            type=int,
            default=0,
            show_default=True,
            help="Seed of batch shuffling.",
        ),
        click.option(
            "--early-stop",
            type=click.IntRange(min=1),
            default=None,
            help="Patience in validations without improvement.",
        ),
        click.option(
            "--w-energy", type=_weight, default=1.0, show_default=True, help="Energy loss weight."
        ),
        click.option(
            "--w-force", type=_weight, default=1.0, show_default=True, help="Force loss weight."
        ),
        click.option(
            "--w-iso",
            type=_weight,
            default=1.0,
            show_default=True,
            help="Isotropic stress loss weight.",
        ),
        click.option(
            "--w-aniso",
            type=_weight,
            default=1.0,
            show_default=True,
            help="Anisotropic stress loss weight.",
        ),
        click.option(
            "--per-atom-energy/--per-structure-energy",
            default=False,
            show_default=True,
            help="Divide the energy error by the atom count.",
        ),
    ]
)

model_options = _apply(
    [
        click.option(
            "--model-kind",
            type=click.Choice(["transformer", "invariant_surrogate", "baseline_mode"]),
            default="transformer",
            show_default=True,
            help="Model family.",
        ),
        click.option(
            "--d-model",
            type=click.IntRange(min=1),
            default=64,
            show_default=True,
            help="Latent width.",
        ),
        click.option(
            "--n-layers",
            type=click.IntRange(min=0),
            default=2,
            show_default=True,
            help="Encoder blocks.",
        ),
        click.option(
            "--n-heads",
            type=click.IntRange(min=1),
            default=4,
            show_default=True,
            help="Attention heads.",
        ),
        click.option(
            "--d-ff",
            type=click.IntRange(min=1),
            default=128,
            show_default=True,
            help="Feed-forward width.",
        ),
        click.option(
            "--init-seed",
            type=int,
            default=0,
            show_default=True,
            help="Seed of parameter initialization.",
        ),
    ]
)

baseline_option = click.option(
    "--baseline-mode",
    type=click.Choice(["mean_energy_zero_force", "all_zero"]),
    default="mean_energy_zero_force",
    show_default=True,
    help="Naive baseline rule.",
)

out_dir_option = click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Output directory (default: $MATSCALE_OUT_DIR or ./runs).",
)

TRAIN_FLAGS = {
    "batch_size": "batch_size",
    "epochs": "epochs",
    "max_lr": "max_lr",
    "grad_clip": "grad_clip",
    "val_period": "val_period_epochs",
    "viz_period": "viz_period_epochs",
    "workers": "workers",
    "cache": "cache",
    "seed": "seed",
    "early_stop": "early_stop_patience",
}
MODEL_FLAGS = ("model_kind", "d_model", "n_layers", "n_heads", "d_ff", "init_seed")
PLAIN_FIELDS = (
    "data",
    "output",
    "train_frac",
    "val_frac",
    "split_seed",
    "n_materials",
    "atoms_min",
    "atoms_max",
    "data_seed",
    "manifest",
    "checkpoint",
    "runs_dir",
    "index",
    "burn_in",
    "loss",
    "include_flagged",
    "baseline_mode",
)


def config_from_params(subcommand: str, params: Mapping[str, Any]) -> CliConfig:
    """Build the :class:`CliConfig` of a subcommand from its parsed parameters.

    Raises:
        ConfigError: If the combined values are invalid; ``field`` names the
            offending setting.
    """
    values: dict[str, Any] = {"subcommand": subcommand}
    values.update({name: params[name] for name in PLAIN_FIELDS if params.get(name) is not None})
    if params.get("out_dir") is not None:
        values["out_dir"] = params["out_dir"]
    if "batch_size" in params:
        out_dir = values.get("out_dir") or get_settings().out_dir
        weights = build_config(
            LossWeights,
            w_energy=params["w_energy"],
            w_force=params["w_force"],
            w_iso_stress=params["w_iso"],
            w_aniso_stress=params["w_aniso"],
            per_atom_energy=params["per_atom_energy"],
        )
        values["train"] = build_config(
            TrainConfig,
            {target: params[flag] for flag, target in TRAIN_FLAGS.items()},
            precision=PrecisionMode.from_flag(params["mixed_precision"]),
            loss_weights=weights,
            out_dir=out_dir,
        )
    if "model_kind" in params:
        model_values = {name: params[name] for name in MODEL_FLAGS}
        if params.get("baseline_mode") is not None:
            model_values["baseline_mode"] = params["baseline_mode"]
        values["model"] = build_config(ModelConfig, model_values)
    return build_config(CliConfig, values)
