"""Architecture hyperparameters."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

ModelKind = Literal["transformer", "invariant_surrogate", "baseline_mode"]
BaselineMode = Literal["mean_energy_zero_force", "all_zero"]

DEFAULT_MAX_NUM_ELEMENTS = 119


class ModelConfig(BaseModel):
    """Hyperparameters that determine a model and its parameter count.

    Attributes:
        model_kind: ``transformer`` (embedding pathways, encoder, direct
            heads), ``invariant_surrogate`` (distance-based message passing
            with gradient forces) or ``baseline_mode`` (constant predictions).
        d_model: Embedding and latent width.
        n_layers: Encoder depth; 0 makes the encoder the identity.
        n_heads: Attention heads; must divide ``d_model``.
        d_ff: Feed-forward width inside each encoder block.
        max_num_elements: Rows of the element embedding table. Row 0 is the
            padding row, so atomic numbers 1 .. max_num_elements - 1 are valid.
        use_index_encoding: Add the sinusoidal atom-index pathway.
        cutoff: Surrogate interaction cutoff in Angstrom.
        n_rbf: Number of Gaussian radial basis functions in the surrogate.
        n_interactions: Message-passing rounds in the surrogate.
        baseline_mode: Prediction rule used when ``model_kind`` is a baseline.
        init_seed: Seed of the parameter initializer.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    model_kind: ModelKind = "transformer"
    d_model: int = Field(default=64, ge=1)
    n_layers: int = Field(default=2, ge=0)
    n_heads: int = Field(default=4, ge=1)
    d_ff: int = Field(default=128, ge=1)
    max_num_elements: int = Field(default=DEFAULT_MAX_NUM_ELEMENTS, ge=2)
    use_index_encoding: bool = True
    layernorm_eps: float = Field(default=1e-5, gt=0.0)
    cutoff: float = Field(default=6.0, gt=0.0)
    n_rbf: int = Field(default=16, ge=2)
    n_interactions: int = Field(default=2, ge=0)
    baseline_mode: BaselineMode = "mean_energy_zero_force"
    init_seed: int = 0

    @model_validator(mode="after")
    def _check_heads(self) -> ModelConfig:
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})")
        if self.model_kind == "transformer" and self.use_index_encoding and self.d_model % 2:
            raise ValueError(f"d_model must be even for the index encoding, got {self.d_model}")
        return self

    def label(self) -> str:
        """Short identifier used in file names and logs."""
        if self.model_kind == "baseline_mode":
            return f"baseline-{self.baseline_mode}"
        if self.model_kind == "invariant_surrogate":
            return f"surrogate-d{self.d_model}-i{self.n_interactions}"
        return f"transformer-d{self.d_model}-l{self.n_layers}-h{self.n_heads}-f{self.d_ff}"
