"""Transformer, invariant surrogate and baseline models for energy, forces and stress."""

from matscale.models.baseline import BASELINE_MODES, BaselineModel, baseline_predict
from matscale.models.config import ModelConfig
from matscale.models.embedding import AtomEmbedding, embed_atoms, sinusoidal_encoding
from matscale.models.factory import build_model, count_params, parameter_memory_bytes, replicate
from matscale.models.heads import EFSHeads, heads_forward
from matscale.models.layers import MLP, LayerNorm, Linear
from matscale.models.module import Model, Module
from matscale.models.prediction import EFSBatch, EFSPrediction
from matscale.models.surrogate import InvariantSurrogate
from matscale.models.transformer import AtomisticTransformer, Encoder, transformer_forward

__all__ = [
    "BASELINE_MODES",
    "AtomEmbedding",
    "AtomisticTransformer",
    "BaselineModel",
    "EFSBatch",
    "EFSHeads",
    "EFSPrediction",
    "Encoder",
    "InvariantSurrogate",
    "LayerNorm",
    "Linear",
    "MLP",
    "Model",
    "ModelConfig",
    "Module",
    "baseline_predict",
    "build_model",
    "count_params",
    "embed_atoms",
    "heads_forward",
    "parameter_memory_bytes",
    "replicate",
    "sinusoidal_encoding",
    "transformer_forward",
]
