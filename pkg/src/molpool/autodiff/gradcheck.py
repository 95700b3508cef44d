from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def numerical_gradient(loss_fn: Callable[[], Tensor], param: Tensor, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar ``loss_fn()`` w.r.t. ``param.data``."""
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = loss_fn().item()
        flat[i] = orig - step
        down = loss_fn().item()
        flat[i] = orig
        gflat[i] = (up - down) / (2 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """``||a - n|| / max(||a||, ||n||, floor)``.

    The floor keeps finite-difference round-off (around 1e-10) from reading as
    a 100% error when the true gradient is exactly zero, e.g. a bias feeding
    straight into training-mode batch norm.
    """
    denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(np.linalg.norm(analytic - numeric) / denom)


def gradient_errors(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    step: float = 1e-5,
    names: Sequence[str] | None = None,
) -> dict[str, float]:
    """Relative error between backprop and finite differences per parameter."""
    for p in params:
        p.grad = None
    loss_fn().backward()
    out = {}
    for k, p in enumerate(params):
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numerical_gradient(loss_fn, p, step)
        label = names[k] if names else (p.name or f"param{k}")
        out[label] = relative_error(analytic, numeric)
    return out
