from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor

TRAINING = "training"
INFERENCE = "inference"


@dataclass
class BatchNormState:
    """Per-channel affine parameters plus running statistics."""

    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5
    mode: str = TRAINING

    @classmethod
    def create(cls, channels: int, dtype=np.float64, momentum: float = 0.1, eps: float = 1e-5):
        return cls(
            gamma=Tensor(np.ones(channels, dtype=dtype), requires_grad=True),
            beta=Tensor(np.zeros(channels, dtype=dtype), requires_grad=True),
            running_mean=np.zeros(channels, dtype=dtype),
            running_var=np.ones(channels, dtype=dtype),
            momentum=momentum,
            eps=eps,
        )

    @property
    def channels(self) -> int:
        return self.gamma.shape[0]


def batchnorm(x: Tensor, state: BatchNormState) -> Tensor:
    """Normalise each column of ``x`` (n x c), then apply gamma/beta.

    Training mode uses the biased batch variance and updates the running
    estimates (unbiased variance) with ``state.momentum``.
    """
    n, c = x.shape
    if c != state.channels:
        raise ValueError(f"batchnorm: input has {c} channels, state has {state.channels}")
    gamma, beta = state.gamma, state.beta

    if state.mode == INFERENCE:
        inv_std = 1.0 / np.sqrt(state.running_var + state.eps)
        xhat = (x.data - state.running_mean) * inv_std
        out = xhat * gamma.data + beta.data

        def backward(g):
            return g * (gamma.data * inv_std), (g * xhat).sum(axis=0), g.sum(axis=0)

        return Tensor._from_op(out.astype(x.dtype, copy=False), (x, gamma, beta), backward, "batchnorm")

    if n == 0:
        raise ValueError("batchnorm in training mode needs at least one row")
    mean = x.data.mean(axis=0)
    centered = x.data - mean
    var = (centered * centered).mean(axis=0)
    inv_std = 1.0 / np.sqrt(var + state.eps)
    xhat = centered * inv_std
    out = xhat * gamma.data + beta.data

    m = state.momentum
    unbiased = var * (n / (n - 1)) if n > 1 else var
    state.running_mean = ((1 - m) * state.running_mean + m * mean).astype(state.running_mean.dtype)
    state.running_var = ((1 - m) * state.running_var + m * unbiased).astype(state.running_var.dtype)

    def backward(g):
        dxhat = g * gamma.data
        dx = inv_std * (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0))
        return dx, (g * xhat).sum(axis=0), g.sum(axis=0)

    return Tensor._from_op(out, (x, gamma, beta), backward, "batchnorm")
