from __future__ import annotations

import numpy as np

from ..autodiff import Tensor, concat, segment_max, segment_sum, tanh
from ..graph import GraphBatch
from .nn import Linear, Module


class GatherHead(Module):
    """Per-node linear map, then ``tanh(max || sum)`` over each graph's nodes."""

    def __init__(self, node_dim: int, width: int, rng: np.random.Generator, dtype=np.float64):
        self.pre_linear = Linear(node_dim, width, rng, dtype)
        self.width = width

    @property
    def out_dim(self) -> int:
        return 2 * self.width

    def __call__(self, batch: GraphBatch) -> Tensor:
        h = self.pre_linear(batch.node_feats)
        gid, count = batch.node_graph_id, batch.graph_count
        return tanh(concat([segment_max(h, gid, count), segment_sum(h, gid, count)], axis=1))
