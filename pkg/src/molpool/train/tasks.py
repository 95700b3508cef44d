from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, masked_bce_with_logits, masked_mse
from . import metrics

REGRESSION = "regression"
CLASSIFICATION = "binary-classification"
TASK_KINDS = (REGRESSION, CLASSIFICATION)


@dataclass
class TaskSpec:
    """Task kind plus, for regression, per-task train-split mean and std."""

    kind: str
    task_count: int
    mean: np.ndarray = field(default=None)
    std: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"task kind must be one of {TASK_KINDS}, got {self.kind!r}")
        if self.task_count < 1:
            raise ValueError("task_count must be at least 1")
        if self.mean is None:
            self.mean = np.zeros(self.task_count)
        if self.std is None:
            self.std = np.ones(self.task_count)
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(self.task_count)
        self.std = np.asarray(self.std, dtype=np.float64).reshape(self.task_count)
        if not (np.isfinite(self.mean).all() and np.isfinite(self.std).all()):
            raise ValueError("normalisation statistics must be finite")
        if (self.std <= 0).any():
            raise ValueError("normalisation std must be positive")

    @classmethod
    def fit(cls, kind: str, targets: np.ndarray, train_idx) -> "TaskSpec":
        """Statistics come from the training rows only; missing labels are NaN."""
        targets = np.asarray(targets, dtype=np.float64)
        task_count = targets.shape[1]
        if kind != REGRESSION:
            return cls(kind, task_count)
        rows = targets[np.asarray(train_idx)]
        if np.isnan(rows).all(axis=0).any():
            raise ValueError("a regression task has no labelled training rows")
        mean = np.nanmean(rows, axis=0)
        std = np.nanstd(rows, axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(kind, task_count, mean, std)

    def normalize(self, y: np.ndarray) -> np.ndarray:
        if self.kind != REGRESSION:
            return np.asarray(y, dtype=np.float64)
        return (np.asarray(y, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, y: np.ndarray) -> np.ndarray:
        if self.kind != REGRESSION:
            return np.asarray(y, dtype=np.float64)
        return np.asarray(y, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"kind": self.kind, "task_count": self.task_count, "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(d["kind"], d["task_count"], d.get("mean"), d.get("std"))


def loss(preds: Tensor, targets: np.ndarray, mask: np.ndarray, kind: str) -> Tensor:
    """Mean over labelled entries: squared error or sigmoid cross-entropy."""
    targets = np.where(mask, targets, 0.0)
    if kind == REGRESSION:
        return masked_mse(preds, targets, mask)
    if kind == CLASSIFICATION:
        return masked_bce_with_logits(preds, targets, mask)
    raise ValueError(f"unknown task kind {kind!r}")


def score(task: TaskSpec, outputs: np.ndarray, targets: np.ndarray) -> dict:
    """Metrics in original units.  ``outputs`` are raw model outputs
    (normalised values or logits); ``targets`` are raw labels with NaN gaps.

    The headline value is the mean over tasks of RMSE (regression) or
    ROC-AUC (classification); tasks where AUC is undefined are skipped.
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    per_task = []
    if task.kind == REGRESSION:
        preds = task.denormalize(outputs)
        for t in range(task.task_count):
            m = ~np.isnan(targets[:, t])
            entry = {"rmse": metrics.rmse(preds[m, t], targets[m, t])}
            try:
                entry["r2"] = metrics.r2(preds[m, t], targets[m, t])
            except metrics.UndefinedMetricError:
                entry["r2"] = None
            per_task.append(entry)
        out = {"rmse": float(np.mean([e["rmse"] for e in per_task]))}
        r2s = [e["r2"] for e in per_task if e["r2"] is not None]
        out["r2"] = float(np.mean(r2s)) if r2s else None
    else:
        defined = []
        for t in range(task.task_count):
            m = ~np.isnan(targets[:, t])
            try:
                auc = metrics.roc_auc(outputs[m, t], targets[m, t])
                defined.append(auc)
            except metrics.UndefinedMetricError:
                auc = None
            per_task.append({"roc_auc": auc})
        if not defined:
            raise metrics.UndefinedMetricError("ROC-AUC undefined for every task")
        out = {"roc_auc": float(np.mean(defined))}
    out["per_task"] = per_task
    out["count"] = int(targets.shape[0])
    return out


def headline(task: TaskSpec) -> tuple[str, bool]:
    """Name of the model-selection metric and whether larger is better."""
    return ("rmse", False) if task.kind == REGRESSION else ("roc_auc", True)
