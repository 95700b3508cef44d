from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..autodiff import Adam
from ..layers import Model
from .data import GraphDataset, iter_batches
from .split import Split
from .tasks import TaskSpec, headline, loss, score

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 300
    batch_size: int = 32
    lr: float = 1e-4
    seed: int = 0
    patience: int = 30

    def validate(self) -> "TrainConfig":
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not self.lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    history: dict
    best_state: dict = field(repr=False)


def predict(model: Model, data: GraphDataset, indices=None, batch_size: int = 128) -> np.ndarray:
    """Raw outputs (normalised regression values or logits) in inference mode."""
    if indices is None:
        indices = np.arange(len(data))
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("nothing to predict: empty index set")
    model.eval()
    parts = [model(b).data for _, b in iter_batches(data, indices, batch_size)]
    return np.concatenate(parts).astype(np.float64)


def evaluate(model: Model, data: GraphDataset, task: TaskSpec, indices=None) -> dict:
    if indices is None:
        indices = np.arange(len(data))
    return score(task, predict(model, data, indices), data.targets[np.asarray(indices)])


def train_epoch(model, optimizer, data, task, indices, batch_size, epoch) -> float:
    model.train()
    total, batches = 0.0, 0
    for step, (idx, b) in enumerate(iter_batches(data, indices, batch_size)):
        raw = data.targets[idx]
        mask = ~np.isnan(raw)
        if not mask.any():
            continue
        preds = model(b)
        value = loss(preds, task.normalize(np.where(mask, raw, 0.0)), mask, task.kind)
        lv = value.item()
        if not math.isfinite(lv):
            raise TrainingDiverged(f"non-finite loss {lv} at epoch {epoch}, batch {step}")
        optimizer.zero_grad()
        value.backward()
        for p in optimizer.params:
            # pooling nets can go unused when a batch has no matching paths
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
        optimizer.step()
        total += lv
        batches += 1
    return total / max(batches, 1)


def train(
    model: Model,
    data: GraphDataset,
    split: Split,
    task: TaskSpec,
    config: TrainConfig,
    config_hash: str = "",
) -> TrainResult:
    """Adam training with early stopping on the validation metric.

    The parameters of the best validation epoch are restored into ``model``
    before test metrics are computed.
    """
    config.validate()
    started = time.perf_counter()
    metric, larger_better = headline(task)
    optimizer = Adam(model.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)
    records = []
    best_value, best_epoch, best_state, stale = None, 0, model.state_dict(), 0
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = rng.permutation(split.train)
        train_loss = train_epoch(model, optimizer, data, task, order, config.batch_size, epoch)
        t1 = time.perf_counter()
        valid = evaluate(model, data, task, split.valid)
        t2 = time.perf_counter()
        value = valid[metric]
        records.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "valid": {k: v for k, v in valid.items() if k != "per_task"},
                "train_seconds": t1 - t0,
                "eval_seconds": t2 - t1,
            }
        )
        log.info("epoch %d loss %.5f valid %s %.4f", epoch, train_loss, metric, value)
        improved = best_value is None or (value > best_value if larger_better else value < best_value)
        if improved:
            best_value, best_epoch, best_state, stale = value, epoch, model.state_dict(), 0
        else:
            stale += 1
            if stale >= config.patience:
                log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
                break
    model.load_state_dict(best_state)
    test = evaluate(model, data, task, split.test)
    history = {
        "config_hash": config_hash,
        "epochs": records,
        "best_epoch": best_epoch,
        "best_valid": {metric: best_value},
        "test": test,
        "mean_train_epoch_seconds": float(np.mean([r["train_seconds"] for r in records])),
        "wall_clock_seconds": time.perf_counter() - started,
    }
    return TrainResult(history, best_state)
