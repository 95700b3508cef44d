from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, add, concat, matmul, scale_rows, segment_sum, take_rows, tanh
from ..graph import KEPT_EDGE, GraphBatch, PoolPlan, extract_subgraph, plan_pool, select_top_k
from .nn import MLP, Module, uniform_init

SIMPLE = "simple"
COARSE_GRAIN = "coarse_grain"


@dataclass
class PoolTrace:
    """What one pooling step did, for inspection and tests."""

    scores: np.ndarray
    kept: np.ndarray
    plan: PoolPlan
    before: GraphBatch
    after: GraphBatch


class TopKPool(Module):
    """Gated top-K node selection with edge rewiring.

    Scores ``y = a @ p``; kept nodes carry ``a * tanh(y)``.  New edges come
    from :func:`~molpool.graph.plan_pool`; their features are either path
    sums (``simple``) or learned (``coarse_grain``).
    """

    def __init__(
        self,
        node_dim: int,
        edge_dim: int,
        rho: float,
        variant: str,
        rng: np.random.Generator,
        mlp_depth: int = 2,
        dtype=np.float64,
    ):
        if not 0.0 < rho <= 1.0:
            raise ValueError(f"keep ratio must lie in (0, 1], got {rho}")
        if variant not in (SIMPLE, COARSE_GRAIN):
            raise ValueError(f"unknown pooling variant {variant!r}")
        self.node_dim, self.edge_dim = node_dim, edge_dim
        self.rho = rho
        self.variant = variant
        self.p = uniform_init(rng, (node_dim, 1), node_dim, dtype)
        if variant == COARSE_GRAIN:
            self.path_net = MLP(node_dim + edge_dim, edge_dim, rng, mlp_depth, dtype)
            self.kept_net = MLP(node_dim + edge_dim, edge_dim, rng, mlp_depth, dtype)

    def scores(self, batch: GraphBatch) -> tuple[Tensor, Tensor]:
        """Projection scores (n x 1) and gated node features (n x c)."""
        a = batch.node_feats
        if a.shape[1] != self.node_dim:
            raise ValueError(f"pool expects node width {self.node_dim}, got {a.shape[1]}")
        y = matmul(a, self.p)
        return y, scale_rows(a, tanh(y))

    def __call__(self, batch: GraphBatch, trace: list | None = None) -> GraphBatch:
        y, gated = self.scores(batch)
        kept = select_top_k(y.data, batch.node_graph_id, batch.graph_count, self.rho)
        plan = plan_pool(batch.edges, batch.num_nodes, kept)
        out = extract_subgraph(batch, plan)
        nodes = take_rows(gated, kept)
        if self.variant == SIMPLE:
            edges = simple_edge_features(batch.edge_feats, plan)
        else:
            edges = self._coarse_edge_features(batch.node_feats, gated, batch.edge_feats, plan)
        out = out.with_features(nodes, edges)
        if trace is not None:
            trace.append(PoolTrace(y.data.reshape(-1).copy(), kept, plan, batch, out))
        return out

    def _coarse_edge_features(self, a: Tensor, gated: Tensor, e: Tensor, plan: PoolPlan) -> Tensor:
        groups = plan.num_groups
        out = Tensor(np.zeros((groups, self.edge_dim), dtype=e.dtype))
        if groups == 0:
            return out

        is_kept = plan.kind == KEPT_EDGE
        ke = np.flatnonzero(is_kept)
        if ke.size:
            # kept edge: kept_net([gated a_u + gated a_v, e_uv])
            ends = add(take_rows(gated, plan.kept[plan.u[ke]]), take_rows(gated, plan.kept[plan.v[ke]]))
            h = self.kept_net(concat([ends, take_rows(e, plan.path_edges[ke, 0])], axis=1))
            out = add(out, segment_sum(h, plan.group[ke], groups))

        pe = np.flatnonzero(~is_kept)
        if pe.size:
            # path: path_net([sum of dropped (pre-gate) node features, sum of path edge features])
            d = plan.dropped[pe]
            rows, cols = np.nonzero(d >= 0)
            node_sum = segment_sum(take_rows(a, d[rows, cols]), rows, pe.size)
            pth = plan.path_edges[pe]
            rows, cols = np.nonzero(pth >= 0)
            edge_sum = segment_sum(take_rows(e, pth[rows, cols]), rows, pe.size)
            h = self.path_net(concat([node_sum, edge_sum], axis=1))
            out = add(out, segment_sum(h, plan.group[pe], groups))
        return out


def simple_edge_features(e: Tensor, plan: PoolPlan) -> Tensor:
    """Per new edge: sum over its provenances of the edge features along each path."""
    rows, cols = np.nonzero(plan.path_edges >= 0)
    flat_edges = plan.path_edges[rows, cols]
    return segment_sum(take_rows(e, flat_edges), plan.group[rows], plan.num_groups)
