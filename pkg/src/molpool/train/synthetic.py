from __future__ import annotations

import numpy as np

from ..chem.featurize import ATOM_VOCAB, EDGE_CHANNELS, NODE_CHANNELS
from ..graph import MolGraph
from .data import GraphDataset


def random_molecule_like(rng: np.random.Generator, n: int, ring_fraction: float = 0.1) -> MolGraph:
    """Random tree with a few extra ring-closing edges and valence capped at 4."""
    degree = np.zeros(n, dtype=np.int64)
    edges = set()
    for i in range(1, n):
        # attach to a recent atom with free valence, giving chain-like shapes
        for _ in range(8):
            j = int(rng.integers(max(0, i - 6), i))
            if degree[j] < 4:
                break
        else:
            j = i - 1
        edges.add((j, i))
        degree[i] += 1
        degree[j] += 1
    for _ in range(int(ring_fraction * n)):
        i = int(rng.integers(0, n - 5)) if n > 5 else 0
        j = i + int(rng.integers(4, 7))
        if j < n and (i, j) not in edges and degree[i] < 4 and degree[j] < 4:
            edges.add((i, j))
            degree[i] += 1
            degree[j] += 1
    e = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)

    types = rng.choice(len(ATOM_VOCAB) + 1, size=n, p=_type_weights())
    node = np.zeros((n, NODE_CHANNELS))
    node[np.arange(n), types] = 1.0
    node[:, -1] = degree
    bonds = rng.choice(EDGE_CHANNELS, size=len(e), p=[0.7, 0.15, 0.05, 0.1])
    edge = np.zeros((len(e), EDGE_CHANNELS))
    edge[np.arange(len(e)), bonds] = 1.0
    return MolGraph(node, e, edge)


def _type_weights() -> np.ndarray:
    w = np.full(len(ATOM_VOCAB) + 1, 0.02)
    w[ATOM_VOCAB.index("C")] = 0.6
    w[ATOM_VOCAB.index("N")] = 0.12
    w[ATOM_VOCAB.index("O")] = 0.12
    return w / w.sum()


def synthetic_dataset(count: int = 500, nodes: int = 100, seed: int = 0) -> GraphDataset:
    """Large molecule-like graphs with node counts within 10% of ``nodes``.

    The target is the heteroatom fraction, so there is something to fit.
    """
    rng = np.random.default_rng(seed)
    graphs, targets = [], []
    carbon = ATOM_VOCAB.index("C")
    for _ in range(count):
        n = int(rng.integers(max(2, int(0.9 * nodes)), int(1.1 * nodes) + 1))
        g = random_molecule_like(rng, n)
        graphs.append(g)
        targets.append(1.0 - g.node_feats[:, carbon].mean())
    return GraphDataset(graphs, np.array(targets)[:, None], [f"synthetic-{k}" for k in range(count)])
