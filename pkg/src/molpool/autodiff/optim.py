from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import Tensor


class Adam:
    """Adam with bias-corrected moment estimates.

    ``step`` reads ``param.grad`` and leaves it in place; call
    :meth:`zero_grad` before the next backward pass.
    """

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        missing = [i for i, p in enumerate(self.params) if p.grad is None]
        if missing:
            names = [self.params[i].name or f"#{i}" for i in missing]
            raise ValueError(f"adam step: parameters without gradient: {names}")
        self.t += 1
        adam_step(self.params, self.m, self.v, self.lr, self.beta1, self.beta2, self.eps, self.t)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def state_dict(self) -> dict:
        return {"t": self.t, "m": [a.copy() for a in self.m], "v": [a.copy() for a in self.v]}


def adam_step(params, m, v, lr, beta1, beta2, eps, t) -> None:
    """In-place Adam update of ``params`` at (1-based) step ``t``."""
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for p, m_i, v_i in zip(params, m, v):
        if p.grad is None:
            raise ValueError(f"adam step: parameter {p.name or p} has no gradient")
        g = p.grad
        m_i *= beta1
        m_i += (1.0 - beta1) * g
        v_i *= beta2
        v_i += (1.0 - beta2) * g * g
        m_hat = m_i / c1
        v_hat = v_i / c2
        p.data -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype, copy=False)
