from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..autodiff import Tensor
from ..chem.featurize import EDGE_CHANNELS, NODE_CHANNELS
from ..graph import GraphBatch
from .conv import DualMessageConv
from .gather import GatherHead
from .nn import Linear, Module
from .pool import COARSE_GRAIN, SIMPLE, TopKPool

NO_POOLING = "none"
POOLING_VARIANTS = (NO_POOLING, SIMPLE, COARSE_GRAIN)


@dataclass
class ModelConfig:
    node_channels: list[int] = field(default_factory=lambda: [128, 128])
    edge_channels: list[int] = field(default_factory=lambda: [128, 128])
    keep_ratio: float = 1.0
    pooling: str = NO_POOLING
    gather_width: int = 128
    task_count: int = 1
    mlp_depth: int = 2
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    node_input: int = NODE_CHANNELS
    edge_input: int = EDGE_CHANNELS

    def validate(self) -> "ModelConfig":
        if len(self.node_channels) < 1:
            raise ValueError("node_channels needs at least one entry")
        if len(self.node_channels) != len(self.edge_channels):
            raise ValueError(
                f"node_channels ({len(self.node_channels)}) and edge_channels "
                f"({len(self.edge_channels)}) must have the same length"
            )
        if any(c < 1 for c in self.node_channels + self.edge_channels):
            raise ValueError("channel widths must be positive")
        if not 0.0 < self.keep_ratio <= 1.0:
            raise ValueError(f"keep_ratio must lie in (0, 1], got {self.keep_ratio}")
        if self.pooling not in POOLING_VARIANTS:
            raise ValueError(f"pooling must be one of {POOLING_VARIANTS}, got {self.pooling!r}")
        if self.task_count < 1 or self.gather_width < 1 or self.mlp_depth < 1:
            raise ValueError("task_count, gather_width and mlp_depth must be positive")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


class Model(Module):
    """conv -> pool -> conv -> ... -> conv, gather head, final affine map.

    Pooling follows every convolution except the last.  Outputs are raw
    (regression values or classification logits).
    """

    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float64):
        config.validate()
        self.config = config
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        self.convs: list[DualMessageConv] = []
        self.pools: list[TopKPool] = []
        cn, ce = config.node_input, config.edge_input
        n_layers = len(config.node_channels)
        for k, (cn_out, ce_out) in enumerate(zip(config.node_channels, config.edge_channels)):
            self.convs.append(
                DualMessageConv(
                    cn, ce, cn_out, ce_out, rng,
                    mlp_depth=config.mlp_depth,
                    bn_momentum=config.bn_momentum,
                    bn_eps=config.bn_eps,
                    dtype=dtype,
                    update_edges=k < n_layers - 1,
                )
            )
            cn, ce = cn_out, ce_out
            if config.pooling != NO_POOLING and k < n_layers - 1:
                self.pools.append(
                    TopKPool(cn, ce, config.keep_ratio, config.pooling, rng, config.mlp_depth, dtype)
                )
        self.gather = GatherHead(cn, config.gather_width, rng, dtype)
        self.head = Linear(self.gather.out_dim, config.task_count, rng, dtype)

    def __call__(self, batch: GraphBatch, trace: list | None = None) -> Tensor:
        x = batch.with_features(
            Tensor(np.asarray(batch.node_feats, dtype=self.dtype)),
            Tensor(np.asarray(batch.edge_feats, dtype=self.dtype).reshape(batch.num_edges, self.config.edge_input)),
        )
        for k, conv in enumerate(self.convs):
            x = conv(x)
            if k < len(self.pools):
                x = self.pools[k](x, trace)
        return self.head(self.gather(x))

    def forward_with_trace(self, batch: GraphBatch):
        trace: list = []
        return self(batch, trace), trace
