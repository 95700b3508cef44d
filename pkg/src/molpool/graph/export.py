"""DOT and JSON emitters for graphs and pool plans."""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .pooling import PoolPlan


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(
    edges: np.ndarray,
    num_nodes: int,
    name: str = "G",
    labels: Sequence[str] | None = None,
    kept: np.ndarray | None = None,
    edge_labels: Sequence[str] | None = None,
) -> str:
    """Undirected DOT graph.  Nodes in ``kept`` are filled gold, others blue."""
    kept_set = set(int(k) for k in kept) if kept is not None else None
    lines = [f"graph {_quote(name)} {{", "  node [style=filled];"]
    for i in range(num_nodes):
        attrs = [f"label={_quote(labels[i] if labels else i)}"]
        if kept_set is not None:
            attrs.append("fillcolor=gold" if i in kept_set else "fillcolor=lightblue")
            attrs.append(f"kept={_quote('true' if i in kept_set else 'false')}")
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for k, (a, b) in enumerate(np.asarray(edges).reshape(-1, 2)):
        attr = f" [label={_quote(edge_labels[k])}]" if edge_labels else ""
        lines.append(f"  n{int(a)} -- n{int(b)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(edges: np.ndarray, num_nodes: int, **extra) -> str:
    doc = {"num_nodes": int(num_nodes), "edges": np.asarray(edges).reshape(-1, 2).tolist()}
    doc.update(extra)
    return json.dumps(doc, indent=2)


def plan_to_json(plan: PoolPlan) -> str:
    groups = []
    for (u, v), provs in plan.merged_groups().items():
        items = []
        for p in provs:
            entry = {"type": type(p).__name__}
            entry.update({k: (list(val) if isinstance(val, tuple) else val) for k, val in vars(p).items()})
            items.append(entry)
        groups.append({"u": u, "v": v, "provenance": items})
    return json.dumps(
        {"num_nodes": plan.num_nodes, "kept": plan.kept.tolist(), "groups": groups}, indent=2
    )
