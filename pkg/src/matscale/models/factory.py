"""Model construction and parameter accounting."""

from __future__ import annotations

import logging

from matscale.data.stats import SummaryStats
from matscale.models.baseline import BaselineModel
from matscale.models.config import ModelConfig
from matscale.models.module import Model, Module
from matscale.models.surrogate import InvariantSurrogate
from matscale.models.transformer import AtomisticTransformer
from matscale.tensor import Engine, PrecisionMode

logger = logging.getLogger(__name__)

# Parameters plus the two Adam moment buffers
OPTIMIZER_COPIES = 3


def build_model(config: ModelConfig, engine: Engine | None = None, stats: SummaryStats | None = None) -> Model:
    """Instantiate the model named by ``config.model_kind``.

    Args:
        config: Architecture hyperparameters; ``init_seed`` fixes the weights.
        engine: Owning engine (a new 64-bit engine when omitted).
        stats: Training statistics, needed by the mean baseline.
    """
    engine = engine or Engine()
    model: Model
    if config.model_kind == "transformer":
        model = AtomisticTransformer(engine, config)
    elif config.model_kind == "invariant_surrogate":
        model = InvariantSurrogate(engine, config)
    else:
        model = BaselineModel(engine, config, stats)
    logger.debug(f"Built {config.label()} with {count_params(model)} non-embedding parameters")
    return model


def replicate(model: Model, engine: Engine) -> Model:
    """Copy of ``model`` owned by ``engine`` with identical parameter values."""
    if isinstance(model, BaselineModel):
        return BaselineModel(engine, model.config, constants=(model.energy_value, model.stress_value))
    replica = build_model(model.config, engine)
    replica.load_state_arrays(model.state_arrays())
    return replica


def count_params(model: Module, include_embeddings: bool = False) -> int:
    """Number of learnable scalars.

    Args:
        model: Any module.
        include_embeddings: Count the element-embedding table too. The
            default excludes it, which gives the model-size axis P.

    Examples:
        >>> count_params(Linear(Engine(), 3, 2, rng))
        8
    """
    embeddings = set() if include_embeddings else model.embedding_names()
    return sum(t.size for name, t in model.named_parameters() if name not in embeddings)


def parameter_memory_bytes(model: Module, precision: PrecisionMode | None = None) -> int:
    """Bytes held by parameters and optimizer moments at the engine's precision."""
    precision = PrecisionMode(precision) if precision is not None else model.engine.precision
    return OPTIMIZER_COPIES * count_params(model, include_embeddings=True) * precision.itemsize
