"""Adaptive-moment optimizer and global-norm gradient clipping.

The optimizer works on raw parameter arrays; its arithmetic is not part of
the FLOP count of a run.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from matscale.exceptions import ContractError
from matscale.tensor import Tensor

logger = logging.getLogger(__name__)


def global_norm(grads: Sequence[np.ndarray]) -> float:
    """L2 norm of all gradient arrays taken together."""
    return float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads)))


def clip_gradients(grads: Sequence[np.ndarray], threshold: float) -> list[np.ndarray]:
    """Scale every gradient by ``threshold / norm`` when the global norm exceeds it.

    Args:
        grads: Gradient arrays, one per parameter.
        threshold: Positive bound on the global L2 norm.

    Returns:
        New arrays; the inputs are not modified.

    Raises:
        ContractError: If ``threshold`` is not positive.

    Examples:
        >>> clipped = clip_gradients([np.array([120.0, 160.0])], 100.0)
        >>> clipped[0].tolist()
        [60.0, 80.0]
    """
    if threshold <= 0:
        raise ContractError(f"Clip threshold must be positive, got {threshold}")
    norm = global_norm(grads)
    if norm <= threshold:
        return [np.array(g, copy=True) for g in grads]
    scale = threshold / norm
    logger.debug(f"Clipping gradient norm {norm:.4g} to {threshold:.4g}")
    return [np.asarray(g) * scale for g in grads]


class Adam:
    """Adam with bias correction, updating parameter arrays in place.

    Attributes:
        params: Parameter tensors in declaration order.
        m, v: First and second moment estimates, one array per parameter.
        t: Number of steps taken.
    """

    def __init__(
        self,
        params: Sequence[Tensor],
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros(p.shape) for p in self.params]
        self.v = [np.zeros(p.shape) for p in self.params]
        self.t = 0

    def step(self, grads: Sequence[np.ndarray], lr: float) -> None:
        """Apply one update with learning rate ``lr``.

        Raises:
            ContractError: If the gradients do not pair with the parameters.
        """
        if len(grads) != len(self.params):
            raise ContractError(f"Got {len(grads)} gradients for {len(self.params)} parameters")
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for i, (param, grad) in enumerate(zip(self.params, grads, strict=True)):
            g = np.asarray(grad, dtype=np.float64)
            if g.shape != param.shape:
                raise ContractError(
                    f"Gradient for '{param.name}' has shape {g.shape}, expected {param.shape}"
                )
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * np.square(g)
            update = lr * (self.m[i] / correction1) / (np.sqrt(self.v[i] / correction2) + self.eps)
            param.data[...] = (param.data - update).astype(param.data.dtype)

    def load_state(self, m: Sequence[np.ndarray], v: Sequence[np.ndarray], t: int) -> None:
        """Restore moments and step count, e.g. from a checkpoint.

        Raises:
            ContractError: If the moment shapes do not match the parameters.
        """
        if len(m) != len(self.params) or len(v) != len(self.params):
            raise ContractError("Optimizer state does not match the parameter list")
        for param, mi, vi in zip(self.params, m, v, strict=True):
            if np.shape(mi) != param.shape or np.shape(vi) != param.shape:
                raise ContractError(f"Optimizer state for '{param.name}' has the wrong shape")
        self.m = [np.array(a, dtype=np.float64) for a in m]
        self.v = [np.array(a, dtype=np.float64) for a in v]
        self.t = int(t)
