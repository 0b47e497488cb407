"""Minimal reverse-mode automatic differentiation over dense tensors."""

from matscale.tensor.engine import Engine
from matscale.tensor.flops import FlopCounter
from matscale.tensor.ops import (
    elementwise,
    layernorm,
    matmul,
    softmax,
)
from matscale.tensor.precision import PrecisionMode
from matscale.tensor.tensor import Tensor

__all__ = [
    "Engine",
    "FlopCounter",
    "PrecisionMode",
    "Tensor",
    "elementwise",
    "layernorm",
    "matmul",
    "softmax",
]
