"""Dense tensor with a gradient slot and computation-graph linkage."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from matscale.tensor.engine import Engine

BackwardFn = Callable[["Tensor"], Sequence["Tensor | None"]]


class Tensor:
    """An n-dimensional array owned by one :class:`Engine`.

    A tensor is either a constant, a leaf (``requires_grad`` and no parents),
    or an interior node recording the parents and the backward rule of the
    operation that produced it. Interior nodes are released by
    :meth:`Engine.backward`; touching a released graph raises
    :class:`~matscale.exceptions.GraphStateError`.

    Attributes:
        data: Values, stored in the engine's precision.
        engine: Owning engine.
        requires_grad: Whether gradients flow into this tensor.
        grad: Accumulated gradient for leaves after a backward pass.
        name: Optional label, used for parameters.
    """

    __slots__ = (
        "data",
        "engine",
        "requires_grad",
        "grad",
        "name",
        "_parents",
        "_backward",
        "_op",
        "_freed",
        "__weakref__",
    )

    # numpy defers binary operators to Tensor when a Tensor is on the right
    __array_priority__ = 1000

    def __init__(
        self,
        data: np.ndarray,
        engine: Engine,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        self.data = data
        self.engine = engine
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None
        self._op = "leaf"
        self._freed = False

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.requires_grad and not self._parents and not self._freed

    def numpy(self) -> np.ndarray:
        """Return a copy of the values."""
        return np.array(self.data, copy=True)

    def item(self) -> float:
        """Return the single value of a one-element tensor."""
        return float(self.data.reshape(-1)[0])

    def detach(self) -> Tensor:
        """Return a constant tensor sharing no graph with this one."""
        return self.engine.constant(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self._op!r}, requires_grad={self.requires_grad}{label})"

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------

    def __add__(self, other: Any) -> Tensor:
        return ops.add(self, other)

    def __radd__(self, other: Any) -> Tensor:
        return ops.add(other, self)

    def __sub__(self, other: Any) -> Tensor:
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> Tensor:
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> Tensor:
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> Tensor:
        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> Tensor:
        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> Tensor:
        return ops.div(other, self)

    def __neg__(self) -> Tensor:
        return ops.neg(self)

    def __matmul__(self, other: Tensor) -> Tensor:
        return ops.matmul(self, other)

    # ------------------------------------------------------------------
    # Method forms of common operations
    # ------------------------------------------------------------------

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        return ops.sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> Tensor:
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> Tensor:
        return ops.transpose(self, axes or None)

    def swap_last(self) -> Tensor:
        """Swap the two trailing axes."""
        return ops.swap_last(self)

    def square(self) -> Tensor:
        return ops.square(self)

    def sqrt(self) -> Tensor:
        return ops.sqrt(self)

    def exp(self) -> Tensor:
        return ops.exp(self)

    def sin(self) -> Tensor:
        return ops.sin(self)

    def cos(self) -> Tensor:
        return ops.cos(self)

    def abs(self) -> Tensor:
        return ops.abs_(self)

    def sigmoid(self) -> Tensor:
        return ops.sigmoid(self)

    def silu(self) -> Tensor:
        return ops.silu(self)


from matscale.tensor import ops  # noqa: E402  (ops needs Tensor defined first)
