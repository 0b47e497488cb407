"""Floating-point operation accounting.

Convention (fixed so that the compute axis C is reproducible):

- matmul: ``2 * m * n * k`` per product, times the number of batched products
- elementwise primitive: 1 per output element (``silu`` applies two)
- reduction sum: 1 per input element
- softmax: 4 per element, layernorm: 8 per element
- reshape, transpose, broadcast and table lookups: free

Backward passes are counted by the same rules on the operations they execute.
"""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager

from pydantic import BaseModel, Field, PrivateAttr, model_validator

FLOPS_PER_ELEMENT: dict[str, int] = {
    "add": 1,
    "sub": 1,
    "mul": 1,
    "div": 1,
    "neg": 1,
    "exp": 1,
    "sin": 1,
    "cos": 1,
    "sqrt": 1,
    "square": 1,
    "sigmoid": 1,
    "abs": 1,
    "silu": 2,
}

SOFTMAX_FLOPS_PER_ELEMENT = 4
LAYERNORM_FLOPS_PER_ELEMENT = 8


def matmul_flops(m: int, n: int, k: int, batch: int = 1) -> int:
    """FLOPs of ``batch`` products of an m x k by a k x n matrix."""
    return 2 * m * n * k * batch


class FlopCounter(BaseModel):
    """Running count of floating-point operations for one engine.

    Attributes:
        total: Total operations counted since the last reset.
        per_op_class: Count per operation kind; always sums to ``total``.
    """

    total: int = Field(default=0, ge=0)
    per_op_class: dict[str, int] = Field(default_factory=dict)

    _suspend_depth: int = PrivateAttr(default=0)

    @model_validator(mode="after")
    def _check_total(self) -> FlopCounter:
        if self.total != sum(self.per_op_class.values()):
            raise ValueError("total must equal the sum over per_op_class")
        return self

    def add(self, kind: str, count: int) -> None:
        """Record ``count`` operations of ``kind`` unless counting is suspended."""
        if self._suspend_depth or count <= 0:
            return
        self.per_op_class[kind] = self.per_op_class.get(kind, 0) + int(count)
        self.total += int(count)

    @contextmanager
    def suspended(self) -> Iterator[None]:
        """Stop counting inside the block.

        Composite operations (softmax, layernorm) run their primitives inside
        this block and then charge their own per-element cost.
        """
        self._suspend_depth += 1
        try:
            yield
        finally:
            self._suspend_depth -= 1

    def reset(self) -> None:
        """Clear all counts."""
        self.total = 0
        self.per_op_class = {}

    def snapshot(self) -> FlopCounter:
        """Return an independent copy of the current counts."""
        return FlopCounter(total=self.total, per_op_class=dict(self.per_op_class))

    def since(self, earlier: FlopCounter) -> FlopCounter:
        """Counts accumulated after ``earlier`` was taken."""
        per_op = {
            kind: count - earlier.per_op_class.get(kind, 0)
            for kind, count in self.per_op_class.items()
            if count - earlier.per_op_class.get(kind, 0) > 0
        }
        return FlopCounter(total=self.total - earlier.total, per_op_class=per_op)
