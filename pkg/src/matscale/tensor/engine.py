"""Reverse-mode automatic differentiation engine.

An :class:`Engine` owns a precision mode, a FLOP counter and the graphs built
from its tensors. Engines and their graphs are confined to one thread;
data-parallel training gives each worker its own engine.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from typing import Any

import numpy as np

from matscale.exceptions import ContractError, GraphStateError
from matscale.tensor import ops
from matscale.tensor.flops import FlopCounter
from matscale.tensor.precision import PrecisionMode
from matscale.tensor.tensor import Tensor

logger = logging.getLogger(__name__)


class Engine:
    """Factory and differentiation context for tensors of one precision.

    Attributes:
        precision: Precision shared by every tensor this engine creates.
        flops: Running FLOP counter.

    Examples:
        >>> engine = Engine()
        >>> x = engine.tensor([1.0, 2.0, 3.0], requires_grad=True)
        >>> grads = engine.backward((x * x).sum())
        >>> grads[x].tolist()
        [2.0, 4.0, 6.0]
    """

    def __init__(self, precision: PrecisionMode = PrecisionMode.HIGH) -> None:
        self.precision = PrecisionMode(precision)
        self.flops = FlopCounter()
        self._grad_enabled = True

    @property
    def dtype(self) -> np.dtype:
        return self.precision.dtype

    @property
    def grad_enabled(self) -> bool:
        return self._grad_enabled

    def __repr__(self) -> str:
        return f"Engine(precision={self.precision.value!r}, flops={self.flops.total})"

    # ------------------------------------------------------------------
    # Tensor factories
    # ------------------------------------------------------------------

    def tensor(self, data: Any, requires_grad: bool = False, name: str | None = None) -> Tensor:
        """Create a tensor holding a private copy of ``data``."""
        array = np.array(data, dtype=self.dtype, copy=True)
        return Tensor(array, self, requires_grad=requires_grad, name=name)

    def constant(self, data: Any) -> Tensor:
        return Tensor(np.asarray(data, dtype=self.dtype), self)

    def zeros(self, shape: Sequence[int], requires_grad: bool = False) -> Tensor:
        return self.tensor(np.zeros(tuple(shape)), requires_grad=requires_grad)

    # ------------------------------------------------------------------
    # Graph control
    # ------------------------------------------------------------------

    @contextmanager
    def no_grad(self) -> Iterator[None]:
        """Build no graph inside the block (FLOPs are still counted)."""
        previous = self._grad_enabled
        self._grad_enabled = False
        try:
            yield
        finally:
            self._grad_enabled = previous

    @contextmanager
    def enable_grad(self) -> Iterator[None]:
        """Build graphs inside the block, even when nested in :meth:`no_grad`."""
        with self._grad_mode(True):
            yield

    @contextmanager
    def _grad_mode(self, enabled: bool) -> Iterator[None]:
        previous = self._grad_enabled
        self._grad_enabled = enabled
        try:
            yield
        finally:
            self._grad_enabled = previous

    def flops_report(self) -> FlopCounter:
        """Return a snapshot of the FLOP counter."""
        return self.flops.snapshot()

    def reset_flops(self) -> None:
        self.flops.reset()

    # ------------------------------------------------------------------
    # Differentiation
    # ------------------------------------------------------------------

    def _check_root(self, root: Tensor) -> None:
        if root.engine is not self:
            raise GraphStateError("Tensor belongs to a different engine")
        if root._freed:
            raise GraphStateError("backward already ran on this graph; it has been freed")
        if root.size != 1:
            raise ContractError(
                f"Differentiation needs a scalar output, got shape {root.shape}",
                {"shape": list(root.shape)},
            )

    @staticmethod
    def _topological_order(root: Tensor) -> list[Tensor]:
        """Nodes reachable from ``root`` that require gradients, parents first."""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def _propagate(
        self,
        root: Tensor,
        order: list[Tensor],
        capture: set[int] | None = None,
    ) -> dict[int, Tensor]:
        grads: dict[int, Tensor] = {id(root): self.constant(np.ones(root.shape))}
        captured: dict[int, Tensor] = {}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if capture is None:
                if node._backward is None:
                    captured[id(node)] = g
            elif id(node) in capture:
                captured[id(node)] = g
            if node._backward is None:
                continue
            for parent, parent_grad in zip(node._parents, node._backward(g), strict=True):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = ops.add(grads[key], parent_grad) if key in grads else parent_grad
        return captured

    def backward(self, loss: Tensor) -> dict[Tensor, np.ndarray]:
        """Back-propagate from a scalar loss to every leaf requiring gradients.

        Leaf ``grad`` slots are accumulated. The graph is freed afterwards, so
        a second call on the same graph raises :class:`GraphStateError`.

        Args:
            loss: Scalar tensor produced by this engine.

        Returns:
            Mapping from each reachable leaf to its gradient. Constants and
            tensors without ``requires_grad`` are absent.

        Raises:
            ContractError: If ``loss`` is not a scalar.
            GraphStateError: If the graph was already consumed.
        """
        self._check_root(loss)
        if not loss.requires_grad:
            loss._freed = True
            return {}
        order = self._topological_order(loss)
        with self._grad_mode(False):
            captured = self._propagate(loss, order)
        by_id = {id(node): node for node in order}
        result: dict[Tensor, np.ndarray] = {}
        for key, g in captured.items():
            leaf = by_id[key]
            if not leaf.is_leaf:
                continue
            values = np.array(g.data, dtype=self.dtype)
            leaf.grad = values.copy() if leaf.grad is None else leaf.grad + values
            result[leaf] = values
        for node in order:
            if node._parents:
                node._parents = ()
                node._backward = None
                node._freed = True
        return result

    def grad(
        self,
        output: Tensor,
        inputs: Sequence[Tensor],
        create_graph: bool = False,
    ) -> list[Tensor]:
        """Gradients of a scalar ``output`` with respect to ``inputs``.

        Unlike :meth:`backward`, no ``grad`` slot is touched and the graph is
        kept. With ``create_graph`` the returned tensors are differentiable
        graph nodes, so a later :meth:`backward` can pass through them.

        Raises:
            ContractError: If ``output`` is not a scalar.
        """
        self._check_root(output)
        if not output.requires_grad:
            return [self.zeros(t.shape) for t in inputs]
        order = self._topological_order(output)
        wanted = {id(t) for t in inputs}
        with self._grad_mode(create_graph):
            captured = self._propagate(output, order, capture=wanted)
        return [captured.get(id(t), self.zeros(t.shape)) for t in inputs]
