"""Dense tensor with reverse-mode automatic differentiation.

Each :class:`Tensor` wraps a numpy array.  Operations in
:mod:`molpool.autodiff.functional` build new tensors that remember their
parents and a closure computing the parents' gradient contributions.
:meth:`Tensor.backward` walks that graph in reverse topological order.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        dtype=None,
        name: str | None = None,
    ):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(np.float64)
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None
        self.op: str | None = None
        self.name = name

    @classmethod
    def _from_op(
        cls,
        data: np.ndarray,
        parents: Iterable[Tensor],
        backward: BackwardFn,
        op: str,
    ) -> Tensor:
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.name = None
        out.op = op
        parents = tuple(parents)
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = parents
            out._backward = backward
        else:
            # nothing upstream needs a gradient, so drop the graph record
            out._parents = ()
            out._backward = None
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{label})"

    def __len__(self) -> int:
        return self.data.shape[0]

    # operator sugar; implementations live in functional
    def __add__(self, other: Tensor) -> Tensor:
        from .functional import add

        return add(self, other)

    def __sub__(self, other: Tensor) -> Tensor:
        from .functional import sub

        return sub(self, other)

    def __mul__(self, other) -> Tensor:
        from .functional import mul, scale

        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self) -> Tensor:
        from .functional import scale

        return scale(self, -1.0)

    def __matmul__(self, other: Tensor) -> Tensor:
        from .functional import matmul

        return matmul(self, other)

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Accumulate d(self)/d(leaf) into ``grad`` of every reachable leaf.

        Only scalar tensors may be differentiated without an explicit seed.
        Leaf gradients accumulate across calls until zeroed.
        """
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(
                    f"backward() needs a scalar loss, got shape {self.shape}"
                )
            grad = np.ones_like(self.data)
        elif np.shape(grad) != self.shape:
            raise ShapeError(
                f"seed gradient shape {np.shape(grad)} != tensor shape {self.shape}"
            )
        if not self.requires_grad:
            return

        order = _topological_order(self)
        pending: dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=self.dtype)}
        for node in reversed(order):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                if node.grad is None:
                    node.grad = g.copy()
                else:
                    node.grad += g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + pg
                else:
                    pending[key] = pg


def _topological_order(root: Tensor) -> list[Tensor]:
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


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)
