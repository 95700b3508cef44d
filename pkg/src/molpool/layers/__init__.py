from .conv import DualMessageConv
from .gather import GatherHead
from .model import NO_POOLING, POOLING_VARIANTS, Model, ModelConfig
from .nn import MLP, Linear, Module
from .pool import COARSE_GRAIN, SIMPLE, PoolTrace, TopKPool, simple_edge_features

__all__ = [
    "COARSE_GRAIN",
    "DualMessageConv",
    "GatherHead",
    "Linear",
    "MLP",
    "Model",
    "ModelConfig",
    "Module",
    "NO_POOLING",
    "POOLING_VARIANTS",
    "PoolTrace",
    "SIMPLE",
    "TopKPool",
    "simple_edge_features",
]
