from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


class UndefinedMetricError(ValueError):
    pass


def _pair(preds, targets) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError(f"predictions {p.shape} and targets {t.shape} differ in length")
    if p.size == 0:
        raise UndefinedMetricError("metric over an empty set")
    return p, t


def rmse(preds, targets) -> float:
    p, t = _pair(preds, targets)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def r2(preds, targets) -> float:
    p, t = _pair(preds, targets)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedMetricError("R^2 undefined for constant targets")
    return 1.0 - float(np.sum((t - p) ** 2)) / ss_tot


def roc_auc(scores, labels) -> float:
    """Mann-Whitney form of the ROC area, with midranks for ties."""
    s, y = _pair(scores, labels)
    pos = y == 1
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("ROC-AUC labels must be 0 or 1")
    n_pos = int(pos.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC-AUC needs both classes present")
    ranks = rankdata(s, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
