"""Run configuration read from a YAML file.

Layout::

    data:     {path, smiles_column, target_columns, task}  or  {synthetic: {graphs, nodes, seed}, task}
    split:    {mode: random | from-file, seed, fractions, path}
    model:    {node_channels, edge_channels, keep_ratio, pooling, gather_width, mlp_depth, bn_momentum, bn_eps}
    train:    {epochs, batch_size, lr, seed, patience}
    runtime:  {dtype: float64 | float32, runs, splits}

Relative paths are resolved against the directory of the config file.
Validation failures carry the file name and line of the offending key.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..layers import POOLING_VARIANTS, ModelConfig
from ..train import FROM_FILE, RANDOM, TASK_KINDS, SplitSpec, TrainConfig

DTYPES = ("float64", "float32")


class ConfigError(ValueError):
    pass


@dataclass
class DataConfig:
    task: str = "regression"
    path: str | None = None
    smiles_column: str = "smiles"
    target_columns: list[str] = field(default_factory=list)
    synthetic: dict | None = None

    @property
    def task_count(self) -> int:
        return 1 if self.synthetic is not None else len(self.target_columns)


@dataclass
class RuntimeConfig:
    dtype: str = "float64"
    runs: int = 1
    splits: int | None = None

    @property
    def split_count(self) -> int:
        return self.splits if self.splits is not None else self.runs


@dataclass
class RunConfig:
    data: DataConfig
    split: SplitSpec
    model: ModelConfig
    train: TrainConfig
    runtime: RuntimeConfig
    source: str | None = None

    def to_dict(self) -> dict:
        model = asdict(self.model)
        for derived in ("node_input", "edge_input", "task_count"):
            model.pop(derived)
        split = asdict(self.split)
        split["fractions"] = list(split["fractions"])
        return {
            "data": asdict(self.data),
            "split": split,
            "model": model,
            "train": asdict(self.train),
            "runtime": asdict(self.runtime),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def hash(self) -> str:
        doc = self.to_dict()
        doc.pop("runtime")
        doc["dtype"] = self.runtime.dtype
        return _digest(doc)

    def hash_without_pooling(self) -> str:
        """Hash of everything but the pooling variant and keep ratio."""
        doc = self.to_dict()
        doc.pop("runtime")
        doc["model"].pop("pooling")
        doc["model"].pop("keep_ratio")
        doc["dtype"] = self.runtime.dtype
        return _digest(doc)


def _digest(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- parsing


class _Reader:
    def __init__(self, text: str, name: str):
        self.name = name
        try:
            self.doc = yaml.safe_load(text)
            self.root = yaml.compose(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{name}:{mark.line + 1}" if mark else name
            raise ConfigError(f"{where}: invalid YAML: {getattr(exc, 'problem', exc)}") from exc
        if self.doc is None:
            self.doc, self.root = {}, None
        if not isinstance(self.doc, dict):
            raise ConfigError(f"{name}:1: top level must be a mapping of sections")

    def line(self, *path: str) -> int:
        node, line = self.root, 1
        for key in path:
            if not isinstance(node, yaml.MappingNode):
                break
            for k, v in node.value:
                if k.value == key:
                    node, line = v, k.start_mark.line + 1
                    break
            else:
                break
        return line

    def fail(self, path: tuple[str, ...], message: str):
        raise ConfigError(f"{self.name}:{self.line(*path)}: {'.'.join(path)}: {message}")

    def section(self, name: str, known: set[str]) -> dict:
        sec = self.doc.get(name, {})
        if sec is None:
            sec = {}
        if not isinstance(sec, dict):
            self.fail((name,), "must be a mapping")
        for key in sec:
            if key not in known:
                self.fail((name, str(key)), f"unknown key (expected one of {sorted(known)})")
        return sec


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return (isinstance(v, (int, float))) and not isinstance(v, bool)


def _get(r: _Reader, sec: dict, section: str, key: str, default, check, message: str):
    if key not in sec or sec[key] is None:
        return default
    value = sec[key]
    if not check(value):
        r.fail((section, key), f"{message}, got {value!r}")
    return value


def _positive_int(v) -> bool:
    return _is_int(v) and v >= 1


def _int_list(v) -> bool:
    return isinstance(v, list) and len(v) >= 1 and all(_positive_int(x) for x in v)


def parse_config(text: str, name: str = "<config>", base_dir: Path | None = None) -> RunConfig:
    r = _Reader(text, name)
    for key in r.doc:
        if key not in ("data", "split", "model", "train", "runtime"):
            r.fail((str(key),), "unknown section (expected data, split, model, train, runtime)")
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    def resolve(p: str) -> str:
        path = Path(p).expanduser()
        return str(path if path.is_absolute() else (base_dir / path).resolve())

    # data
    sec = r.section("data", {"task", "path", "smiles_column", "target_columns", "synthetic"})
    data = DataConfig(
        task=_get(r, sec, "data", "task", "regression", lambda v: v in TASK_KINDS, f"must be one of {TASK_KINDS}"),
        path=_get(r, sec, "data", "path", None, lambda v: isinstance(v, str) and v, "must be a file path"),
        smiles_column=_get(r, sec, "data", "smiles_column", "smiles", lambda v: isinstance(v, str), "must be a string"),
        target_columns=_get(
            r, sec, "data", "target_columns", [],
            lambda v: isinstance(v, list) and v and all(isinstance(c, str) for c in v),
            "must be a non-empty list of column names",
        ),
        synthetic=_get(r, sec, "data", "synthetic", None, lambda v: isinstance(v, dict), "must be a mapping"),
    )
    if data.synthetic is not None:
        syn = {"graphs": 500, "nodes": 100, "seed": 0}
        for key, value in data.synthetic.items():
            if key not in syn:
                r.fail(("data", "synthetic", str(key)), "unknown key (expected graphs, nodes, seed)")
            if not (_is_int(value) and value >= (0 if key == "seed" else 3)):
                r.fail(("data", "synthetic", key), f"must be an integer, got {value!r}")
            syn[key] = value
        data.synthetic = syn
        if data.path is not None:
            r.fail(("data", "path"), "give either a path or a synthetic block, not both")
    else:
        if data.path is None:
            r.fail(("data",), "needs a path (or a synthetic block)")
        if not data.target_columns:
            r.fail(("data",), "needs target_columns")
        data.path = resolve(data.path)

    # split
    sec = r.section("split", {"mode", "seed", "fractions", "path"})
    fractions = _get(
        r, sec, "split", "fractions", [0.8, 0.1, 0.1],
        lambda v: isinstance(v, list) and len(v) == 3 and all(_is_number(x) and x >= 0 for x in v),
        "must be three non-negative numbers",
    )
    if abs(sum(fractions) - 1.0) > 1e-9:
        r.fail(("split", "fractions"), f"must sum to 1, got {fractions}")
    split = SplitSpec(
        mode=_get(r, sec, "split", "mode", RANDOM, lambda v: v in (RANDOM, FROM_FILE), f"must be {RANDOM} or {FROM_FILE}"),
        seed=_get(r, sec, "split", "seed", 0, lambda v: _is_int(v) and v >= 0, "must be a non-negative integer"),
        path=_get(r, sec, "split", "path", None, lambda v: isinstance(v, str) and v, "must be a file path"),
        fractions=tuple(float(x) for x in fractions),
    )
    if split.mode == FROM_FILE:
        if split.path is None:
            r.fail(("split", "mode"), "from-file split needs split.path")
        split.path = resolve(split.path)

    # model
    sec = r.section(
        "model",
        {"node_channels", "edge_channels", "keep_ratio", "pooling", "gather_width", "mlp_depth", "bn_momentum", "bn_eps"},
    )
    defaults = ModelConfig()
    model = ModelConfig(
        node_channels=_get(r, sec, "model", "node_channels", defaults.node_channels, _int_list, "must be a list of positive integers"),
        edge_channels=_get(r, sec, "model", "edge_channels", defaults.edge_channels, _int_list, "must be a list of positive integers"),
        keep_ratio=float(_get(r, sec, "model", "keep_ratio", 1.0, lambda v: _is_number(v) and 0 < v <= 1, "must lie in (0, 1]")),
        pooling=_get(r, sec, "model", "pooling", "none", lambda v: v in POOLING_VARIANTS, f"must be one of {POOLING_VARIANTS}"),
        gather_width=_get(r, sec, "model", "gather_width", defaults.gather_width, _positive_int, "must be a positive integer"),
        mlp_depth=_get(r, sec, "model", "mlp_depth", defaults.mlp_depth, _positive_int, "must be a positive integer"),
        bn_momentum=float(_get(r, sec, "model", "bn_momentum", defaults.bn_momentum, lambda v: _is_number(v) and 0 < v <= 1, "must lie in (0, 1]")),
        bn_eps=float(_get(r, sec, "model", "bn_eps", defaults.bn_eps, lambda v: _is_number(v) and v > 0, "must be positive")),
        task_count=max(data.task_count, 1),
    )
    if len(model.node_channels) != len(model.edge_channels):
        r.fail(("model", "edge_channels"), f"needs {len(model.node_channels)} entries to match node_channels")

    # train
    sec = r.section("train", {"epochs", "batch_size", "lr", "seed", "patience"})
    d = TrainConfig()
    train = TrainConfig(
        epochs=_get(r, sec, "train", "epochs", d.epochs, _positive_int, "must be a positive integer"),
        batch_size=_get(r, sec, "train", "batch_size", d.batch_size, _positive_int, "must be a positive integer"),
        lr=float(_get(r, sec, "train", "lr", d.lr, lambda v: _is_number(v) and v > 0, "must be a positive number")),
        seed=_get(r, sec, "train", "seed", d.seed, lambda v: _is_int(v) and v >= 0, "must be a non-negative integer"),
        patience=_get(r, sec, "train", "patience", d.patience, _positive_int, "must be a positive integer"),
    )

    # runtime
    sec = r.section("runtime", {"dtype", "runs", "splits"})
    runtime = RuntimeConfig(
        dtype=_get(r, sec, "runtime", "dtype", "float64", lambda v: v in DTYPES, f"must be one of {DTYPES}"),
        runs=_get(r, sec, "runtime", "runs", 1, _positive_int, "must be a positive integer"),
        splits=_get(r, sec, "runtime", "splits", None, _positive_int, "must be a positive integer"),
    )
    return RunConfig(data, split, model, train, runtime, source=name)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path), path.parent)

