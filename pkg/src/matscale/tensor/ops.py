"""Differentiable tensor operations.

Every backward rule is written with the operations of this module, so the
gradients it produces are themselves differentiable when an engine builds
them with ``create_graph=True``. That is what lets the invariant surrogate
train on forces obtained as energy gradients.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING, Any

import numpy as np

from matscale.exceptions import ContractError, DimensionError, GraphStateError
from matscale.tensor.flops import (
    FLOPS_PER_ELEMENT,
    LAYERNORM_FLOPS_PER_ELEMENT,
    SOFTMAX_FLOPS_PER_ELEMENT,
    matmul_flops,
)
from matscale.tensor.tensor import BackwardFn, Tensor

if TYPE_CHECKING:
    from matscale.tensor.engine import Engine

Axis = int | tuple[int, ...] | None


# ----------------------------------------------------------------------
# Node construction
# ----------------------------------------------------------------------


def _engine_of(*values: Any) -> Engine:
    for value in values:
        if isinstance(value, Tensor):
            return value.engine
    raise ContractError("At least one operand must be a Tensor")


def _coerce(value: Any, engine: Engine) -> Tensor:
    if isinstance(value, Tensor):
        if value.engine is not engine:
            raise GraphStateError("Operands belong to different engines")
        return value
    return engine.constant(value)


def _make(
    engine: Engine,
    data: np.ndarray,
    parents: Sequence[Tensor],
    backward: BackwardFn,
    op: str,
) -> Tensor:
    out = Tensor(np.asarray(data, dtype=engine.dtype), engine)
    out._op = op
    if engine.grad_enabled and any(p.requires_grad for p in parents):
        if any(p._freed for p in parents):
            raise GraphStateError(f"'{op}' received a tensor from a graph already consumed by backward")
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def broadcast_shape(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Result shape of a binary operation.

    The lower-rank shape is left-padded with ones; each dimension pair must
    then be equal or contain a 1.

    Raises:
        DimensionError: If the shapes are incompatible.
    """
    rank = max(len(a), len(b))
    pa = (1,) * (rank - len(a)) + tuple(a)
    pb = (1,) * (rank - len(b)) + tuple(b)
    out = []
    for da, db in zip(pa, pb, strict=True):
        if da == db or db == 1:
            out.append(da)
        elif da == 1:
            out.append(db)
        else:
            raise DimensionError(f"Incompatible shapes {tuple(a)} and {tuple(b)}", shapes=(a, b))
    return tuple(out)


def unbroadcast(grad: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Sum ``grad`` over the axes along which an operand of ``shape`` was broadcast."""
    if grad.shape == tuple(shape):
        return grad
    lead = grad.ndim - len(shape)
    axes = tuple(range(lead)) + tuple(
        i + lead for i, size in enumerate(shape) if size == 1 and grad.shape[i + lead] != 1
    )
    reduced = sum_(grad, axis=axes, keepdims=True) if axes else grad
    return reshape(reduced, tuple(shape))


# ----------------------------------------------------------------------
# Binary elementwise
# ----------------------------------------------------------------------


def _binary(
    kind: str,
    a: Any,
    b: Any,
    forward: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rule: Callable[[Tensor, Tensor, Tensor, Tensor], tuple[Tensor, Tensor]],
) -> Tensor:
    engine = _engine_of(a, b)
    ta, tb = _coerce(a, engine), _coerce(b, engine)
    shape = broadcast_shape(ta.shape, tb.shape)
    data = forward(ta.data, tb.data)
    engine.flops.add(kind, int(np.prod(shape, dtype=np.int64)))

    def backward(g: Tensor) -> tuple[Tensor | None, Tensor | None]:
        ga, gb = rule(g, ta, tb, out)
        return (
            unbroadcast(ga, ta.shape) if ta.requires_grad else None,
            unbroadcast(gb, tb.shape) if tb.requires_grad else None,
        )

    out = _make(engine, data, (ta, tb), backward, kind)
    return out


def add(a: Any, b: Any) -> Tensor:
    return _binary("add", a, b, np.add, lambda g, x, y, out: (g, g))


def sub(a: Any, b: Any) -> Tensor:
    return _binary("sub", a, b, np.subtract, lambda g, x, y, out: (g, neg(g)))


def mul(a: Any, b: Any) -> Tensor:
    return _binary("mul", a, b, np.multiply, lambda g, x, y, out: (mul(g, y), mul(g, x)))


def div(a: Any, b: Any) -> Tensor:
    return _binary(
        "div",
        a,
        b,
        np.divide,
        lambda g, x, y, out: (div(g, y), neg(div(mul(g, out), y))),
    )


# ----------------------------------------------------------------------
# Unary elementwise
# ----------------------------------------------------------------------


def _unary(
    kind: str,
    x: Tensor,
    forward: Callable[[np.ndarray], np.ndarray],
    rule: Callable[[Tensor, Tensor, Tensor], Tensor],
) -> Tensor:
    engine = x.engine
    data = forward(x.data)
    engine.flops.add(kind, FLOPS_PER_ELEMENT[kind] * x.size)

    def backward(g: Tensor) -> tuple[Tensor]:
        return (rule(g, x, out),)

    out = _make(engine, data, (x,), backward, kind)
    return out


def _stable_sigmoid(values: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * values))


def neg(x: Tensor) -> Tensor:
    return _unary("neg", x, np.negative, lambda g, x_, out: neg(g))


def exp(x: Tensor) -> Tensor:
    return _unary("exp", x, np.exp, lambda g, x_, out: mul(g, out))


def sin(x: Tensor) -> Tensor:
    return _unary("sin", x, np.sin, lambda g, x_, out: mul(g, cos(x_)))


def cos(x: Tensor) -> Tensor:
    return _unary("cos", x, np.cos, lambda g, x_, out: neg(mul(g, sin(x_))))


def sqrt(x: Tensor) -> Tensor:
    return _unary("sqrt", x, np.sqrt, lambda g, x_, out: div(mul(g, 0.5), out))


def square(x: Tensor) -> Tensor:
    return _unary("square", x, np.square, lambda g, x_, out: mul(mul(g, x_), 2.0))


def sigmoid(x: Tensor) -> Tensor:
    return _unary(
        "sigmoid", x, _stable_sigmoid, lambda g, x_, out: mul(g, mul(out, sub(1.0, out)))
    )


def _silu_rule(g: Tensor, x: Tensor, out: Tensor) -> Tensor:
    # d/dx x*s(x) = s + x*s*(1 - s) = s + out*(1 - s)
    s = sigmoid(x)
    return mul(g, add(s, mul(out, sub(1.0, s))))


def silu(x: Tensor) -> Tensor:
    return _unary("silu", x, lambda v: v * _stable_sigmoid(v), _silu_rule)


def abs_(x: Tensor) -> Tensor:
    # subgradient at 0 is 0
    return _unary("abs", x, np.abs, lambda g, x_, out: mul(g, np.sign(x_.data)))


_UNARY: dict[str, Callable[[Tensor], Tensor]] = {
    "neg": neg,
    "exp": exp,
    "sin": sin,
    "cos": cos,
    "sqrt": sqrt,
    "square": square,
    "sigmoid": sigmoid,
    "silu": silu,
    "abs": abs_,
}
_BINARY: dict[str, Callable[[Any, Any], Tensor]] = {"add": add, "sub": sub, "mul": mul, "div": div}


def elementwise(op_kind: str, x: Tensor, y: Any = None) -> Tensor:
    """Apply a named elementwise operation.

    Args:
        op_kind: One of add, sub, mul, div (binary) or neg, exp, sin, cos,
            sqrt, square, sigmoid, silu, abs (unary).
        x: First operand.
        y: Second operand for binary kinds.

    Raises:
        ContractError: For an unknown kind or a missing second operand.
        DimensionError: For shapes that do not broadcast.
    """
    if op_kind in _BINARY:
        if y is None:
            raise ContractError(f"Elementwise '{op_kind}' needs two operands")
        return _BINARY[op_kind](x, y)
    if op_kind in _UNARY:
        return _UNARY[op_kind](x)
    raise ContractError(f"Unknown elementwise operation '{op_kind}'")


# ----------------------------------------------------------------------
# Reductions and data movement
# ----------------------------------------------------------------------


def _normalize_axes(axis: Axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    normalized = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise DimensionError(f"Axis {ax} out of range for {ndim}-d tensor")
        normalized.append(ax % ndim)
    return tuple(sorted(set(normalized)))


def sum_(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    engine = x.engine
    axes = _normalize_axes(axis, x.ndim)
    data = np.sum(x.data, axis=axes, keepdims=keepdims)
    engine.flops.add("sum", x.size)
    kept_shape = tuple(1 if i in axes else s for i, s in enumerate(x.shape))

    def backward(g: Tensor) -> tuple[Tensor]:
        return (broadcast_to(reshape(g, kept_shape), x.shape),)

    return _make(engine, data, (x,), backward, "sum")


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes], dtype=np.int64)) if axes else 1
    return mul(sum_(x, axis=axes, keepdims=keepdims), 1.0 / max(count, 1))


def broadcast_to(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    target = tuple(shape)
    if broadcast_shape(x.shape, target) != target:
        raise DimensionError(f"Cannot broadcast {x.shape} to {target}", shapes=(x.shape, target))
    data = np.array(np.broadcast_to(x.data, target))

    def backward(g: Tensor) -> tuple[Tensor]:
        return (unbroadcast(g, x.shape),)

    return _make(x.engine, data, (x,), backward, "broadcast")


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        data = x.data.reshape(shape)
    except ValueError as e:
        raise DimensionError(
            f"Cannot reshape {x.shape} to {tuple(shape)}", shapes=(x.shape, tuple(shape))
        ) from e
    source = x.shape

    def backward(g: Tensor) -> tuple[Tensor]:
        return (reshape(g, source),)

    return _make(x.engine, data, (x,), backward, "reshape")


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    perm = tuple(reversed(range(x.ndim))) if axes is None else tuple(a % x.ndim for a in axes)
    if sorted(perm) != list(range(x.ndim)):
        raise DimensionError(f"Invalid permutation {perm} for shape {x.shape}")
    data = np.transpose(x.data, perm)
    inverse = tuple(int(i) for i in np.argsort(perm))

    def backward(g: Tensor) -> tuple[Tensor]:
        return (transpose(g, inverse),)

    return _make(x.engine, data, (x,), backward, "transpose")


def swap_last(x: Tensor) -> Tensor:
    perm = list(range(x.ndim))
    perm[-1], perm[-2] = perm[-2], perm[-1]
    return transpose(x, perm)


def take(x: Tensor, indices: np.ndarray, axis: int = 0) -> Tensor:
    """Gather entries of ``x`` along ``axis`` (a table lookup, not counted as FLOPs)."""
    idx = np.asarray(indices, dtype=np.int64)
    ax = axis % x.ndim
    data = np.take(x.data, idx, axis=ax)
    size = x.shape[ax]

    def backward(g: Tensor) -> tuple[Tensor]:
        return (put_add(g, idx, ax, size),)

    return _make(x.engine, data, (x,), backward, "take")


def put_add(g: Tensor, indices: np.ndarray, axis: int, size: int) -> Tensor:
    """Scatter-add ``g`` into a zero tensor with ``size`` entries along ``axis``.

    Adjoint of :func:`take`; ``g`` has the shape ``take`` produced.
    """
    idx = np.asarray(indices, dtype=np.int64)
    pre = g.shape[:axis]
    post = g.shape[axis + idx.ndim :]
    flat = g.data.reshape(pre + (idx.size,) + post)
    data = np.zeros(pre + (size,) + post, dtype=g.engine.dtype)
    np.add.at(data, (slice(None),) * axis + (idx.reshape(-1),), flat)
    g.engine.flops.add("sum", g.size)

    def backward(gg: Tensor) -> tuple[Tensor]:
        return (take(gg, idx, axis),)

    return _make(g.engine, data, (g,), backward, "put_add")


# ----------------------------------------------------------------------
# Linear algebra and composites
# ----------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the two trailing axes.

    Leading (batch) axes must match exactly.

    Raises:
        DimensionError: If inner or batch dimensions disagree.
    """
    engine = _engine_of(a, b)
    ta, tb = _coerce(a, engine), _coerce(b, engine)
    if ta.ndim < 2 or tb.ndim < 2 or ta.shape[:-2] != tb.shape[:-2] or ta.shape[-1] != tb.shape[-2]:
        raise DimensionError(
            f"matmul shape mismatch: {ta.shape} @ {tb.shape}", shapes=(ta.shape, tb.shape)
        )
    m, k = ta.shape[-2:]
    n = tb.shape[-1]
    batch = int(np.prod(ta.shape[:-2], dtype=np.int64))
    data = np.matmul(ta.data, tb.data)
    engine.flops.add("matmul", matmul_flops(m, n, k, batch))

    def backward(g: Tensor) -> tuple[Tensor | None, Tensor | None]:
        return (
            matmul(g, swap_last(tb)) if ta.requires_grad else None,
            matmul(swap_last(ta), g) if tb.requires_grad else None,
        )

    return _make(engine, data, (ta, tb), backward, "matmul")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Softmax along ``axis``, stabilized by subtracting the running maximum."""
    ax = _normalize_axes(axis, x.ndim)[0]
    engine = x.engine
    shift = engine.constant(np.max(x.data, axis=ax, keepdims=True))
    with engine.flops.suspended():
        e = exp(sub(x, shift))
        out = div(e, sum_(e, axis=ax, keepdims=True))
    engine.flops.add("softmax", SOFTMAX_FLOPS_PER_ELEMENT * x.size)
    return out


def layernorm(x: Tensor, gain: Any, bias: Any, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply ``gain`` and ``bias``.

    Raises:
        ContractError: If ``eps`` is not positive.
    """
    if eps <= 0:
        raise ContractError(f"layernorm eps must be positive, got {eps}")
    engine = x.engine
    with engine.flops.suspended():
        centered = sub(x, mean(x, axis=-1, keepdims=True))
        var = mean(square(centered), axis=-1, keepdims=True)
        normalized = div(centered, sqrt(add(var, eps)))
        out = add(mul(normalized, gain), bias)
    engine.flops.add("layernorm", LAYERNORM_FLOPS_PER_ELEMENT * x.size)
    return out
