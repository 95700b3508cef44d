import numpy as np

from molpool.graph import GraphBatch, MolGraph, batch
from molpool.layers import Model, ModelConfig
from oracles import random_graph


def random_molgraph(rng, n, density=0.4, cn=12, ce=4, integer=False):
    e = random_graph(rng, n, density)
    if integer:
        return MolGraph(
            rng.integers(-3, 4, size=(n, cn)).astype(float), e,
            rng.integers(-3, 4, size=(len(e), ce)).astype(float),
        )
    return MolGraph(rng.normal(size=(n, cn)), e, rng.normal(size=(len(e), ce)))


def small_model(pooling="simple", rho=0.5, seed=0, layers=3, tasks=1):
    cfg = ModelConfig(
        node_channels=[5, 4, 3][:layers],
        edge_channels=[3, 4, 2][:layers],
        keep_ratio=rho,
        pooling=pooling,
        gather_width=3,
        task_count=tasks,
    )
    return Model(cfg, seed=seed)


def randomise_batchnorm(model, rng):
    for _, bn in model.named_batchnorms():
        bn.gamma.data[:] = rng.uniform(0.5, 1.5, size=bn.channels)
        bn.beta.data[:] = rng.normal(scale=0.3, size=bn.channels)
        bn.running_mean[:] = rng.normal(scale=0.3, size=bn.channels)
        bn.running_var[:] = rng.uniform(0.5, 2.0, size=bn.channels)


def permute_graph(g: MolGraph, perm: np.ndarray) -> MolGraph:
    """Relabel node ``i`` as ``perm[i]``."""
    inv = np.argsort(perm)
    edges = perm[g.edges] if g.num_edges else g.edges
    edges = np.sort(edges, axis=1)
    return MolGraph(g.node_feats[inv], edges, g.edge_feats)


def tensor_batch(b: GraphBatch, model_dtype=np.float64) -> GraphBatch:
    from molpool.autodiff import Tensor

    return b.with_features(
        Tensor(np.asarray(b.node_feats, dtype=model_dtype), requires_grad=True),
        Tensor(np.asarray(b.edge_feats, dtype=model_dtype), requires_grad=True),
    )


def single_batch(g: MolGraph) -> GraphBatch:
    return batch([g])
