from .data import GraphDataset, iter_batches
from .loop import TrainConfig, TrainingDiverged, TrainResult, evaluate, predict, train, train_epoch
from .metrics import UndefinedMetricError, r2, rmse, roc_auc
from .split import FROM_FILE, RANDOM, Split, SplitError, SplitSpec, read_split_file, split
from .synthetic import random_molecule_like, synthetic_dataset
from .tasks import CLASSIFICATION, REGRESSION, TASK_KINDS, TaskSpec, headline, loss, score

__all__ = [
    "CLASSIFICATION",
    "FROM_FILE",
    "GraphDataset",
    "RANDOM",
    "REGRESSION",
    "Split",
    "SplitError",
    "SplitSpec",
    "TASK_KINDS",
    "TaskSpec",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "UndefinedMetricError",
    "evaluate",
    "headline",
    "iter_batches",
    "loss",
    "predict",
    "r2",
    "read_split_file",
    "rmse",
    "roc_auc",
    "random_molecule_like",
    "score",
    "split",
    "synthetic_dataset",
    "train",
    "train_epoch",
]
