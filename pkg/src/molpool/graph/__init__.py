from .containers import GraphBatch, MolGraph, batch
from .export import graph_to_dot, graph_to_json, plan_to_json
from .pooling import (
    KEPT_EDGE,
    ONE_HOP,
    TWO_HOP,
    KeptEdge,
    OneHop,
    PoolPlan,
    TwoHop,
    extract_subgraph,
    keep_count,
    plan_pool,
    select_top_k,
)

__all__ = [
    "GraphBatch",
    "KEPT_EDGE",
    "KeptEdge",
    "MolGraph",
    "ONE_HOP",
    "OneHop",
    "PoolPlan",
    "TWO_HOP",
    "TwoHop",
    "batch",
    "extract_subgraph",
    "graph_to_dot",
    "graph_to_json",
    "keep_count",
    "plan_pool",
    "plan_to_json",
    "select_top_k",
]
