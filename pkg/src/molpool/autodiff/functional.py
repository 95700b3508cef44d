"""Differentiable operations on :class:`~molpool.autodiff.tensor.Tensor`.

Binary elementwise ops require identical shapes.  The only broadcasting
forms are the explicit ones: :func:`scale` (python scalar),
:func:`affine` (row bias) and :func:`scale_rows` (per-row factor).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .tensor import ShapeError, Tensor

ELEMENTWISE_OPS = ("add", "sub", "mul", "relu", "tanh", "sigmoid", "scale")


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return Tensor._from_op(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return Tensor._from_op(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return Tensor._from_op(
        a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data), "mul"
    )


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return Tensor._from_op(a.data * c, (a,), lambda g: (g * c,), "scale")


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return Tensor._from_op(a.data * mask, (a,), lambda g: (g * mask,), "relu")


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    return Tensor._from_op(t, (a,), lambda g: (g * (1.0 - t * t),), "tanh")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    s = _sigmoid(a.data)
    return Tensor._from_op(s, (a,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def elementwise(op: str, *inputs: Tensor, factor: float | None = None) -> Tensor:
    """Dispatch by name: ``elementwise("relu", x)``, ``elementwise("add", x, y)``."""
    if op == "scale":
        if factor is None or len(inputs) != 1:
            raise ValueError("scale takes one tensor and a factor")
        return scale(inputs[0], factor)
    fn = {"add": add, "sub": sub, "mul": mul, "relu": relu, "tanh": tanh, "sigmoid": sigmoid}.get(op)
    if fn is None:
        raise ValueError(f"unknown elementwise op {op!r}; expected one of {ELEMENTWISE_OPS}")
    return fn(*inputs)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} x {b.shape}")

    def backward(g):
        return (
            g @ b.data.T if a.requires_grad else None,
            a.data.T @ g if b.requires_grad else None,
        )

    return Tensor._from_op(a.data @ b.data, (a, b), backward, "matmul")


def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """``x @ weight + bias`` with ``bias`` of shape ``(out,)`` added to every row."""
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(f"affine: input {x.shape} does not match weight {weight.shape}")
    if bias.shape != (weight.shape[1],):
        raise ShapeError(f"affine: bias {bias.shape} does not match weight {weight.shape}")

    def backward(g):
        return (
            g @ weight.data.T if x.requires_grad else None,
            x.data.T @ g if weight.requires_grad else None,
            g.sum(axis=0),
        )

    return Tensor._from_op(x.data @ weight.data + bias.data, (x, weight, bias), backward, "affine")


def scale_rows(x: Tensor, factors: Tensor) -> Tensor:
    """Multiply row ``i`` of ``x`` by ``factors[i, 0]``."""
    if factors.shape != (x.shape[0], 1):
        raise ShapeError(f"scale_rows: factors {factors.shape} for input {x.shape}")

    def backward(g):
        return g * factors.data, (g * x.data).sum(axis=1, keepdims=True)

    return Tensor._from_op(x.data * factors.data, (x, factors), backward, "scale_rows")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ValueError("concat of an empty list")
    ndim = tensors[0].data.ndim
    if not -ndim <= axis < ndim:
        raise ShapeError(f"concat: axis {axis} out of range for {ndim}-d tensors")
    axis %= ndim
    if len(tensors) == 1:
        return tensors[0]
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.data.ndim != ndim or any(
            s != r for d, (s, r) in enumerate(zip(t.shape, ref)) if d != axis
        ):
            raise ShapeError(f"concat along axis {axis}: incompatible shapes {ref} and {t.shape}")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return np.split(g, bounds, axis=axis)

    out = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor._from_op(out, tensors, backward, "concat")


def take_rows(x: Tensor, index) -> Tensor:
    """Row gather ``x[index]``; repeated indices accumulate in backward."""
    index = np.asarray(index, dtype=np.int64)
    n = x.shape[0]
    if index.size and (index.min() < 0 or index.max() >= n):
        raise IndexError(f"take_rows: index out of range for {n} rows")

    def backward(g):
        return (_scatter_sum(g, index, n),)

    return Tensor._from_op(x.data[index], (x,), backward, "take_rows")


def _segment_matrix(ids: np.ndarray, num_segments: int, dtype) -> sp.csr_matrix:
    n = ids.shape[0]
    return sp.csr_matrix(
        (np.ones(n, dtype=dtype), (ids, np.arange(n))), shape=(num_segments, n)
    )


def _scatter_sum(values: np.ndarray, ids: np.ndarray, num_segments: int) -> np.ndarray:
    # rows are added in increasing source order, same as a sequential loop
    if values.shape[0] == 0:
        return np.zeros((num_segments,) + values.shape[1:], dtype=values.dtype)
    m = _segment_matrix(ids, num_segments, values.dtype)
    return np.asarray(m @ values)


def _check_segments(values: Tensor, ids: np.ndarray, num_segments: int) -> None:
    if values.data.ndim != 2:
        raise ShapeError(f"segment_reduce expects a 2-d tensor, got {values.shape}")
    if ids.shape != (values.shape[0],):
        raise ShapeError(
            f"segment_reduce: {ids.shape[0]} segment ids for {values.shape[0]} rows"
        )
    if ids.size and (ids.min() < 0 or ids.max() >= num_segments):
        raise IndexError(
            f"segment id out of range [0, {num_segments}): "
            f"min {ids.min()}, max {ids.max()}"
        )


def segment_sum(values: Tensor, ids, num_segments: int) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    _check_segments(values, ids, num_segments)
    out = _scatter_sum(values.data, ids, num_segments)
    return Tensor._from_op(out, (values,), lambda g: (g[ids],), "segment_sum")


def segment_max(values: Tensor, ids, num_segments: int) -> Tensor:
    """Per-segment column max; empty segments give 0.

    The gradient goes to the lowest-index row attaining the max.
    """
    ids = np.asarray(ids, dtype=np.int64)
    _check_segments(values, ids, num_segments)
    n, c = values.shape
    out = np.zeros((num_segments, c), dtype=values.dtype)
    if n == 0:
        return Tensor._from_op(out, (values,), lambda g: (np.zeros_like(values.data),), "segment_max")

    order = np.argsort(ids, kind="stable")
    sorted_ids = ids[order]
    sorted_vals = values.data[order]
    starts = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
    present = sorted_ids[starts]
    seg_max = np.maximum.reduceat(sorted_vals, starts, axis=0)
    out[present] = seg_max

    # first row (in original order, thanks to the stable sort) hitting the max
    hits = sorted_vals == out[sorted_ids]
    pos = np.where(hits, np.arange(n)[:, None], n)
    first = np.minimum.reduceat(pos, starts, axis=0)
    argmax_rows = order[first]  # (segments present, c)

    def backward(g):
        grad = np.zeros_like(values.data)
        cols = np.broadcast_to(np.arange(c), argmax_rows.shape)
        grad[argmax_rows, cols] = g[present]
        return (grad,)

    return Tensor._from_op(out, (values,), backward, "segment_max")


def segment_reduce(values: Tensor, segment_ids, mode: str, num_segments: int) -> Tensor:
    if mode == "sum":
        return segment_sum(values, segment_ids, num_segments)
    if mode == "max":
        return segment_max(values, segment_ids, num_segments)
    raise ValueError(f"segment_reduce mode must be 'sum' or 'max', got {mode!r}")


def sum_all(x: Tensor) -> Tensor:
    shape = x.shape
    return Tensor._from_op(
        np.asarray(x.data.sum(), dtype=x.dtype), (x,),
        lambda g: (np.full(shape, g, dtype=x.dtype),), "sum",
    )


def masked_mse(preds: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean squared error over entries where ``mask`` is true."""
    targets = np.asarray(targets, dtype=preds.dtype)
    mask = np.asarray(mask, dtype=bool)
    if targets.shape != preds.shape or mask.shape != preds.shape:
        raise ShapeError(
            f"masked_mse: preds {preds.shape}, targets {targets.shape}, mask {mask.shape}"
        )
    count = int(mask.sum())
    if count == 0:
        raise ValueError("loss over a batch with no labelled entries")
    diff = np.where(mask, preds.data - np.where(mask, targets, 0), 0).astype(preds.dtype)
    value = np.asarray((diff * diff).sum() / count, dtype=preds.dtype)
    return Tensor._from_op(value, (preds,), lambda g: (g * 2.0 * diff / count,), "mse")


def masked_bce_with_logits(logits: Tensor, labels: np.ndarray, mask: np.ndarray) -> Tensor:
    """Sigmoid + binary cross-entropy, averaged over labelled entries."""
    labels = np.asarray(labels, dtype=logits.dtype)
    mask = np.asarray(mask, dtype=bool)
    if labels.shape != logits.shape or mask.shape != logits.shape:
        raise ShapeError(
            f"masked_bce: logits {logits.shape}, labels {labels.shape}, mask {mask.shape}"
        )
    count = int(mask.sum())
    if count == 0:
        raise ValueError("loss over a batch with no labelled entries")
    z = logits.data
    y = np.where(mask, labels, 0)
    # log(1 + exp(z)) - y z, written to stay finite for large |z|
    per = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    value = np.asarray(np.where(mask, per, 0).sum() / count, dtype=logits.dtype)
    grad_local = np.where(mask, _sigmoid(z) - y, 0).astype(logits.dtype) / count
    return Tensor._from_op(value, (logits,), lambda g: (g * grad_local,), "bce")
