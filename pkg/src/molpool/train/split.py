from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

RANDOM = "random"
FROM_FILE = "from-file"


class SplitError(ValueError):
    pass


class Split(NamedTuple):
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray


@dataclass
class SplitSpec:
    mode: str = RANDOM
    seed: int = 0
    path: str | None = None
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def validate(self) -> "SplitSpec":
        if self.mode not in (RANDOM, FROM_FILE):
            raise SplitError(f"split mode must be {RANDOM!r} or {FROM_FILE!r}, got {self.mode!r}")
        if self.mode == FROM_FILE and not self.path:
            raise SplitError("from-file split needs a path")
        f = tuple(float(x) for x in self.fractions)
        if len(f) != 3 or any(x < 0 for x in f) or not math.isclose(sum(f), 1.0, abs_tol=1e-9):
            raise SplitError(f"split fractions must be three non-negative numbers summing to 1, got {self.fractions}")
        return self


def split(count: int, spec: SplitSpec) -> Split:
    """Partition ``range(count)`` into train/valid/test index arrays.

    Random mode shuffles with ``spec.seed`` and floors the train and valid
    sizes; the remainder goes to test.
    """
    spec.validate()
    if count < 3:
        raise SplitError(f"need at least 3 records to split, got {count}")
    if spec.mode == FROM_FILE:
        return read_split_file(spec.path, count)
    order = np.random.default_rng(spec.seed).permutation(count)
    n_train = int(math.floor(spec.fractions[0] * count + 1e-9))
    n_valid = int(math.floor(spec.fractions[1] * count + 1e-9))
    return Split(
        np.sort(order[:n_train]),
        np.sort(order[n_train : n_train + n_valid]),
        np.sort(order[n_train + n_valid :]),
    )


def read_split_file(path, count: int) -> Split:
    """Read ``{"train": [...], "valid": [...], "test": [...]}`` and check it
    is a partition of ``range(count)``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SplitError(f"cannot read split file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SplitError(f"{path}: expected a JSON object with train/valid/test lists")
    parts = []
    for key in ("train", "valid", "test"):
        idx = doc.get(key)
        if not isinstance(idx, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise SplitError(f"{path}: {key!r} must be a list of integers")
        parts.append(np.asarray(idx, dtype=np.int64))
    every = np.concatenate(parts)
    if every.size and (every.min() < 0 or every.max() >= count):
        raise SplitError(f"{path}: indices must lie in [0, {count})")
    values, counts = np.unique(every, return_counts=True)
    if (counts > 1).any():
        raise SplitError(f"{path}: overlapping indices, e.g. {values[counts > 1][:5].tolist()}")
    if values.size != count:
        raise SplitError(f"{path}: split covers {values.size} of {count} records")
    return Split(*(np.sort(p) for p in parts))
