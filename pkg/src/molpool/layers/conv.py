from __future__ import annotations

import numpy as np

from ..autodiff import BatchNormState, Tensor, add, batchnorm, concat, relu, segment_sum, take_rows
from ..graph import GraphBatch
from .nn import MLP, Linear, Module


class DualMessageConv(Module):
    """Graph convolution that updates node and edge features.

    Nodes:  a'_i = ReLU(BN(sum_j f([a_j, e_ij]) + W_s a_i + b_s)), summing over
    both orientations of every stored edge.
    Edges:  e'_ij = ReLU(BN(g([a'_i + a'_j, e_ij]) + W_e e_ij + b_e)).

    With ``update_edges=False`` the edge half is not built and incoming
    edge features pass through unchanged (used for the last layer, whose
    edge output nothing reads).
    """

    def __init__(
        self,
        node_in: int,
        edge_in: int,
        node_out: int,
        edge_out: int,
        rng: np.random.Generator,
        mlp_depth: int = 2,
        bn_momentum: float = 0.1,
        bn_eps: float = 1e-5,
        dtype=np.float64,
        update_edges: bool = True,
    ):
        self.node_in, self.edge_in = node_in, edge_in
        self.node_out, self.edge_out = node_out, edge_out
        self.update_edges = update_edges
        self.f_net = MLP(node_in + edge_in, node_out, rng, mlp_depth, dtype)
        self.node_self = Linear(node_in, node_out, rng, dtype)
        self.node_bn = BatchNormState.create(node_out, dtype, bn_momentum, bn_eps)
        if update_edges:
            self.g_net = MLP(node_out + edge_in, edge_out, rng, mlp_depth, dtype)
            self.edge_self = Linear(edge_in, edge_out, rng, dtype)
            self.edge_bn = BatchNormState.create(edge_out, dtype, bn_momentum, bn_eps)

    def __call__(self, batch: GraphBatch) -> GraphBatch:
        a, e = batch.node_feats, batch.edge_feats
        if a.shape[1] != self.node_in or e.shape[1] != self.edge_in:
            raise ValueError(
                f"conv expects node/edge widths ({self.node_in}, {self.edge_in}), "
                f"got ({a.shape[1]}, {e.shape[1]})"
            )
        n, m = batch.num_nodes, batch.num_edges
        i, j = batch.edges[:, 0], batch.edges[:, 1]

        # directed copies: j -> i then i -> j
        src = np.concatenate([j, i])
        dst = np.concatenate([i, j])
        e_dir = take_rows(e, np.concatenate([np.arange(m), np.arange(m)]))
        messages = self.f_net(concat([take_rows(a, src), e_dir], axis=1))
        m_node = segment_sum(messages, dst, n)
        a_new = relu(batchnorm(add(m_node, self.node_self(a)), self.node_bn))

        if not self.update_edges:
            e_new = e
        elif m == 0:
            e_new = Tensor(np.zeros((0, self.edge_out), dtype=a_new.dtype))
        else:
            pair = add(take_rows(a_new, i), take_rows(a_new, j))
            m_edge = self.g_net(concat([pair, e], axis=1))
            e_new = relu(batchnorm(add(m_edge, self.edge_self(e)), self.edge_bn))
        return batch.with_features(a_new, e_new)
