from .batchnorm import INFERENCE, TRAINING, BatchNormState, batchnorm
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .functional import (
    add,
    affine,
    concat,
    elementwise,
    masked_bce_with_logits,
    masked_mse,
    matmul,
    mul,
    relu,
    scale,
    scale_rows,
    segment_max,
    segment_reduce,
    segment_sum,
    sigmoid,
    sub,
    sum_all,
    take_rows,
    tanh,
)
from .optim import Adam, adam_step
from .tensor import ShapeError, Tensor, as_tensor

__all__ = [
    "Adam",
    "BatchNormState",
    "CheckpointError",
    "INFERENCE",
    "ShapeError",
    "TRAINING",
    "Tensor",
    "adam_step",
    "add",
    "affine",
    "as_tensor",
    "batchnorm",
    "concat",
    "elementwise",
    "load_checkpoint",
    "masked_bce_with_logits",
    "masked_mse",
    "matmul",
    "mul",
    "relu",
    "save_checkpoint",
    "scale",
    "scale_rows",
    "segment_max",
    "segment_reduce",
    "segment_sum",
    "sigmoid",
    "sub",
    "sum_all",
    "tanh",
    "take_rows",
]
