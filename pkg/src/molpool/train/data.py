from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..chem import DatasetRecord, featurize
from ..graph import GraphBatch, MolGraph, batch


@dataclass
class GraphDataset:
    """Featurised graphs with an ``(N, tasks)`` target matrix; NaN marks a
    missing label."""

    graphs: list[MolGraph]
    targets: np.ndarray
    names: list[str]

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.targets.ndim == 1:
            self.targets = self.targets[:, None]
        if len(self.graphs) != self.targets.shape[0] or len(self.names) != len(self.graphs):
            raise ValueError("graphs, targets and names must have the same length")

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def task_count(self) -> int:
        return self.targets.shape[1]

    @classmethod
    def from_records(cls, records: Sequence[DatasetRecord]) -> "GraphDataset":
        graphs = [featurize(r.molecule) for r in records]
        targets = np.array([[np.nan if v is None else v for v in r.targets] for r in records], dtype=np.float64)
        return cls(graphs, targets.reshape(len(records), -1), [r.smiles for r in records])

    def subset(self, idx) -> "GraphDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return GraphDataset([self.graphs[i] for i in idx], self.targets[idx], [self.names[i] for i in idx])


def iter_batches(
    data: GraphDataset, indices: np.ndarray, batch_size: int
) -> Iterator[tuple[np.ndarray, GraphBatch]]:
    for start in range(0, len(indices), batch_size):
        idx = indices[start : start + batch_size]
        yield idx, batch([data.graphs[i] for i in idx])
