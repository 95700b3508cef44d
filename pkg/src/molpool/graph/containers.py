from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


@dataclass
class MolGraph:
    """One undirected graph; ``edges`` rows are ``(i, j)`` with ``i < j``."""

    node_feats: np.ndarray
    edges: np.ndarray
    edge_feats: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n = self.node_feats.shape[0]
        if self.edge_feats.shape[0] != self.edges.shape[0]:
            raise ValueError(
                f"{self.edges.shape[0]} edges but {self.edge_feats.shape[0]} edge feature rows"
            )
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= n:
                raise ValueError(f"edge endpoint outside [0, {n})")
            if np.any(self.edges[:, 0] >= self.edges[:, 1]):
                raise ValueError("edges must be stored once with i < j (no self-loops)")
            if len(np.unique(self.edges, axis=0)) != len(self.edges):
                raise ValueError("duplicate edge")

    @property
    def num_nodes(self) -> int:
        return self.node_feats.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]


@dataclass
class GraphBatch:
    """Several graphs concatenated into one disjoint graph.

    ``node_feats``/``edge_feats`` are numpy arrays for raw data and
    :class:`~molpool.autodiff.Tensor` objects inside the model.
    """

    node_feats: Any
    edges: np.ndarray
    edge_feats: Any
    node_graph_id: np.ndarray
    edge_graph_id: np.ndarray
    graph_count: int

    @property
    def num_nodes(self) -> int:
        return self.node_graph_id.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def nodes_per_graph(self) -> np.ndarray:
        return np.bincount(self.node_graph_id, minlength=self.graph_count)

    def edges_per_graph(self) -> np.ndarray:
        return np.bincount(self.edge_graph_id, minlength=self.graph_count)

    def with_features(self, node_feats, edge_feats) -> GraphBatch:
        return GraphBatch(
            node_feats, self.edges, edge_feats, self.node_graph_id, self.edge_graph_id, self.graph_count
        )

    def graph(self, g: int) -> MolGraph:
        """Slice out graph ``g`` (features must be numpy arrays)."""
        nodes = np.flatnonzero(self.node_graph_id == g)
        eids = np.flatnonzero(self.edge_graph_id == g)
        offset = nodes[0] if nodes.size else 0
        return MolGraph(
            np.asarray(self.node_feats)[nodes],
            self.edges[eids] - offset,
            np.asarray(self.edge_feats)[eids],
        )


def batch(graphs: Sequence[MolGraph]) -> GraphBatch:
    if not graphs:
        raise ValueError("cannot batch an empty list of graphs")
    cn = graphs[0].node_feats.shape[1]
    ce = graphs[0].edge_feats.shape[1]
    for k, g in enumerate(graphs):
        if g.node_feats.shape[1] != cn or g.edge_feats.shape[1] != ce:
            raise ValueError(
                f"graph {k} has widths ({g.node_feats.shape[1]}, {g.edge_feats.shape[1]}), "
                f"expected ({cn}, {ce})"
            )
    n_nodes = np.array([g.num_nodes for g in graphs])
    n_edges = np.array([g.num_edges for g in graphs])
    offsets = np.concatenate([[0], np.cumsum(n_nodes)[:-1]])
    edges = np.concatenate(
        [g.edges + off for g, off in zip(graphs, offsets)]
    ).reshape(-1, 2).astype(np.int64)
    return GraphBatch(
        node_feats=np.concatenate([g.node_feats for g in graphs]),
        edges=edges,
        edge_feats=np.concatenate([g.edge_feats for g in graphs]).reshape(-1, ce),
        node_graph_id=np.repeat(np.arange(len(graphs)), n_nodes),
        edge_graph_id=np.repeat(np.arange(len(graphs)), n_edges),
        graph_count=len(graphs),
    )
