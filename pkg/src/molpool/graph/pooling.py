"""Structural half of top-K pooling.

Given which nodes survive, :func:`plan_pool` finds every path between two
kept nodes whose interior consists of one or two dropped nodes, plus the
kept-kept edges, and groups them by unordered kept pair.  Dropped nodes
that lie on no such path simply disappear along with their edges.

Everything is vectorised over the edge list, so a whole
:class:`~molpool.graph.containers.GraphBatch` can be planned in one call;
since no edge crosses graph boundaries this is identical to planning each
graph separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .containers import GraphBatch

KEPT_EDGE, ONE_HOP, TWO_HOP = 0, 1, 2


@dataclass(frozen=True)
class KeptEdge:
    edge: int


@dataclass(frozen=True)
class OneHop:
    edge_ud: int
    dropped: int
    edge_dv: int


@dataclass(frozen=True)
class TwoHop:
    edges: tuple[int, int, int]
    dropped: tuple[int, int]


Provenance = Union[KeptEdge, OneHop, TwoHop]


@dataclass
class PoolPlan:
    """Result of planning one pooling step.

    Per provenance entry ``p`` (rows of the arrays below):

    * ``kind[p]`` is ``KEPT_EDGE``, ``ONE_HOP`` or ``TWO_HOP``;
    * ``u[p] < v[p]`` are kept-local endpoints (positions in ``kept``);
    * ``path_edges[p]`` lists edge ids from ``u`` to ``v`` (``-1`` padded);
    * ``dropped[p]`` lists interior node ids from ``u`` to ``v`` (``-1`` padded);
    * ``group[p]`` indexes ``new_edges``.
    """

    kept: np.ndarray
    kind: np.ndarray
    u: np.ndarray
    v: np.ndarray
    path_edges: np.ndarray
    dropped: np.ndarray
    group: np.ndarray
    new_edges: np.ndarray
    num_nodes: int

    @property
    def num_groups(self) -> int:
        return self.new_edges.shape[0]

    def provenance(self, p: int) -> Provenance:
        e = self.path_edges[p]
        d = self.dropped[p]
        if self.kind[p] == KEPT_EDGE:
            return KeptEdge(int(e[0]))
        if self.kind[p] == ONE_HOP:
            return OneHop(int(e[0]), int(d[0]), int(e[1]))
        return TwoHop((int(e[0]), int(e[1]), int(e[2])), (int(d[0]), int(d[1])))

    def new_edge_list(self) -> list[tuple[int, int, Provenance]]:
        return [(int(self.u[p]), int(self.v[p]), self.provenance(p)) for p in range(len(self.kind))]

    def merged_groups(self) -> dict[tuple[int, int], list[Provenance]]:
        out: dict[tuple[int, int], list[Provenance]] = {}
        for u, v, prov in self.new_edge_list():
            out.setdefault((u, v), []).append(prov)
        return out


def keep_count(n: int, rho: float) -> int:
    """Number of nodes kept out of ``n``: ``ceil(rho * n)`` clamped to ``[1, n]``."""
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"keep ratio must lie in (0, 1], got {rho}")
    if n < 1:
        raise ValueError("keep_count needs at least one node")
    # the tolerance stops 0.7 * 10 = 7.000000000000001 from rounding up to 8
    k = math.ceil(rho * n - 1e-9)
    return min(max(k, 1), n)


def select_top_k(scores: np.ndarray, node_graph_id: np.ndarray, graph_count: int, rho: float) -> np.ndarray:
    """Indices (sorted) of the ``keep_count`` best-scoring nodes of each graph.

    Ties go to the lower node index.
    """
    scores = np.asarray(scores).reshape(-1)
    counts = np.bincount(node_graph_id, minlength=graph_count)
    if np.any(counts == 0):
        raise ValueError(f"graph {int(np.argmin(counts))} has no nodes to pool")
    k_per_graph = np.array([keep_count(int(c), rho) for c in counts])
    n = scores.shape[0]
    order = np.lexsort((np.arange(n), -scores, node_graph_id))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    gid_sorted = node_graph_id[order]
    rank = np.arange(n) - starts[gid_sorted]
    return np.sort(order[rank < k_per_graph[gid_sorted]])


def _pairs_within_groups(starts: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (p, q), p < q, of positions inside each [start, start+size) block."""
    total = int(sizes.sum())
    if total == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    pos = np.arange(total)
    block = np.repeat(np.arange(len(sizes)), sizes)
    block_end = (starts + sizes)[block]
    pos_global = np.repeat(starts, sizes) + (pos - np.repeat(np.cumsum(sizes) - sizes, sizes))
    per = block_end - pos_global - 1
    p = np.repeat(pos_global, per)
    offs = np.arange(int(per.sum())) - np.repeat(np.cumsum(per) - per, per)
    return p, p + 1 + offs


def _cross_pairs(a_start, a_size, b_start, b_size) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For each row t, the cross product of blocks A_t and B_t."""
    cnt = a_size * b_size
    t = np.repeat(np.arange(len(cnt)), cnt)
    r = np.arange(int(cnt.sum())) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return t, a_start[t] + r // b_size[t], b_start[t] + r % b_size[t]


def plan_pool(edges: np.ndarray, num_nodes: int, kept) -> PoolPlan:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    kept = np.unique(np.asarray(kept, dtype=np.int64))
    if kept.size == 0:
        raise ValueError("cannot pool to an empty kept set")
    if kept[0] < 0 or kept[-1] >= num_nodes:
        raise ValueError("kept index out of range")
    is_kept = np.zeros(num_nodes, dtype=bool)
    is_kept[kept] = True
    local = np.full(num_nodes, -1, dtype=np.int64)
    local[kept] = np.arange(kept.size)

    eid = np.arange(edges.shape[0])
    i, j = edges[:, 0], edges[:, 1]
    ki, kj = is_kept[i], is_kept[j]

    parts_u, parts_v, parts_e, parts_d, parts_kind = [], [], [], [], []

    # kept - kept
    kk = ki & kj
    lu, lv = local[i[kk]], local[j[kk]]
    parts_u.append(np.minimum(lu, lv))
    parts_v.append(np.maximum(lu, lv))
    parts_e.append(np.column_stack([eid[kk], np.full((kk.sum(), 2), -1)]))
    parts_d.append(np.full((kk.sum(), 2), -1))
    parts_kind.append(np.full(kk.sum(), KEPT_EDGE))

    # half edges dropped -> kept, grouped by the dropped node, kept end ascending
    mixed = ki ^ kj
    hd = np.where(ki[mixed], j[mixed], i[mixed])
    hk = np.where(ki[mixed], i[mixed], j[mixed])
    he = eid[mixed]
    order = np.lexsort((local[hk], hd))
    hd, hk, he = hd[order], hk[order], he[order]
    kept_deg = np.bincount(hd, minlength=num_nodes)
    start = np.concatenate([[0], np.cumsum(kept_deg)[:-1]])

    # kept - dropped - kept
    dropped_nodes = np.flatnonzero(kept_deg >= 2)
    p, q = _pairs_within_groups(start[dropped_nodes], kept_deg[dropped_nodes])
    parts_u.append(local[hk[p]])
    parts_v.append(local[hk[q]])
    parts_e.append(np.column_stack([he[p], he[q], np.full(p.size, -1)]))
    parts_d.append(np.column_stack([hd[p], np.full(p.size, -1)]))
    parts_kind.append(np.full(p.size, ONE_HOP))

    # kept - dropped - dropped - kept
    dd = ~ki & ~kj
    d1, d2, de = i[dd], j[dd], eid[dd]
    t, a, b = _cross_pairs(start[d1], kept_deg[d1], start[d2], kept_deg[d2])
    ok = hk[a] != hk[b]
    t, a, b = t[ok], a[ok], b[ok]
    la, lb = local[hk[a]], local[hk[b]]
    fwd = la < lb
    e_path = np.column_stack([he[a], de[t], he[b]])
    e_path[~fwd] = e_path[~fwd][:, ::-1]
    d_path = np.column_stack([d1[t], d2[t]])
    d_path[~fwd] = d_path[~fwd][:, ::-1]
    parts_u.append(np.minimum(la, lb))
    parts_v.append(np.maximum(la, lb))
    parts_e.append(e_path)
    parts_d.append(d_path)
    parts_kind.append(np.full(t.size, TWO_HOP))

    u = np.concatenate(parts_u).astype(np.int64)
    v = np.concatenate(parts_v).astype(np.int64)
    path_edges = np.concatenate(parts_e).astype(np.int64).reshape(-1, 3)
    dropped = np.concatenate(parts_d).astype(np.int64).reshape(-1, 2)
    kind = np.concatenate(parts_kind).astype(np.int8)

    n_kept = kept.size
    keys, group = np.unique(u * n_kept + v, return_inverse=True)
    srt = np.argsort(group, kind="stable")
    return PoolPlan(
        kept=kept,
        kind=kind[srt],
        u=u[srt],
        v=v[srt],
        path_edges=path_edges[srt],
        dropped=dropped[srt],
        group=group.reshape(-1)[srt],
        new_edges=np.column_stack([keys // n_kept, keys % n_kept]).astype(np.int64).reshape(-1, 2),
        num_nodes=num_nodes,
    )


def extract_subgraph(batch: GraphBatch, plan: PoolPlan) -> GraphBatch:
    """Structure of the pooled batch; features are left as ``None``."""
    node_gid = batch.node_graph_id[plan.kept]
    edges = plan.new_edges
    return GraphBatch(
        node_feats=None,
        edges=edges,
        edge_feats=None,
        node_graph_id=node_gid,
        edge_graph_id=node_gid[edges[:, 0]] if edges.size else np.zeros(0, np.int64),
        graph_count=batch.graph_count,
    )
