from __future__ import annotations

from typing import Iterator

import numpy as np

from ..autodiff import INFERENCE, TRAINING, BatchNormState, Tensor, affine, relu


class Module:
    """Minimal container: parameters, batch-norm states and child modules."""

    def children(self) -> Iterator[tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, list):
                for k, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{k}", item

    def own_parameters(self) -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield name, value
            elif isinstance(value, BatchNormState):
                yield f"{name}.gamma", value.gamma
                yield f"{name}.beta", value.beta

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, p in self.own_parameters():
            yield prefix + name, p
        for name, child in self.children():
            yield from child.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def named_batchnorms(self, prefix: str = "") -> Iterator[tuple[str, BatchNormState]]:
        for name, value in vars(self).items():
            if isinstance(value, BatchNormState):
                yield prefix + name, value
        for name, child in self.children():
            yield from child.named_batchnorms(f"{prefix}{name}.")

    def train(self) -> "Module":
        for _, bn in self.named_batchnorms():
            bn.mode = TRAINING
        return self

    def eval(self) -> "Module":
        for _, bn in self.named_batchnorms():
            bn.mode = INFERENCE
        return self

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        for name, bn in self.named_batchnorms():
            state[f"{name}.running_mean"] = bn.running_mean.copy()
            state[f"{name}.running_var"] = bn.running_var.copy()
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = {name: p for name, p in self.named_parameters()}
        bns = dict(self.named_batchnorms())
        expected = set(own) | {f"{n}.{s}" for n in bns for s in ("running_mean", "running_var")}
        missing = sorted(expected - set(state))
        if missing:
            raise ValueError(f"checkpoint is missing {missing[:5]}")
        unexpected = sorted(set(state) - expected)
        if unexpected:
            raise ValueError(f"checkpoint has unexpected entries {unexpected[:5]}")
        for name, p in own.items():
            arr = np.asarray(state[name])
            if arr.shape != p.shape:
                layer = name.rsplit(".", 1)[0]
                raise ValueError(
                    f"layer {layer!r}: checkpoint {name} has shape {arr.shape}, model expects {p.shape}"
                )
            p.data[...] = arr
        for name, bn in bns.items():
            for stat in ("running_mean", "running_var"):
                arr = np.asarray(state[f"{name}.{stat}"])
                if arr.shape != getattr(bn, stat).shape:
                    raise ValueError(
                        f"layer {name!r}: checkpoint {stat} has shape {arr.shape}, "
                        f"model expects {getattr(bn, stat).shape}"
                    )
                getattr(bn, stat)[...] = arr


def uniform_init(rng: np.random.Generator, shape, fan_in: int, dtype) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype), requires_grad=True)


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float64):
        self.in_dim, self.out_dim = in_dim, out_dim
        self.weight = uniform_init(rng, (in_dim, out_dim), in_dim, dtype)
        self.bias = uniform_init(rng, (out_dim,), in_dim, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return affine(x, self.weight, self.bias)


class MLP(Module):
    """``depth`` affine layers with ReLU between them; hidden width = output width."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, depth: int = 2, dtype=np.float64):
        if depth < 1:
            raise ValueError("MLP depth must be at least 1")
        dims = [in_dim] + [out_dim] * depth
        self.layers = [Linear(a, b, rng, dtype) for a, b in zip(dims[:-1], dims[1:])]
        self.in_dim, self.out_dim = in_dim, out_dim

    def __call__(self, x: Tensor) -> Tensor:
        for k, layer in enumerate(self.layers):
            if k:
                x = relu(x)
            x = layer(x)
        return x
