from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..autodiff import Adam, load_checkpoint, save_checkpoint
from ..chem import SmilesError, featurize, load_csv, parse_smiles
from ..graph import batch, graph_to_dot, graph_to_json, plan_to_json
from ..layers import NO_POOLING, SIMPLE, Model
from ..train import (
    GraphDataset,
    TaskSpec,
    evaluate,
    split,
    synthetic_dataset,
    train,
    train_epoch,
)
from .config import RunConfig

log = logging.getLogger(__name__)

DETERMINISTIC_ENV = "MOLPOOL_DETERMINISTIC"


class CommandError(RuntimeError):
    pass


def deterministic() -> bool:
    return os.environ.get(DETERMINISTIC_ENV, "") not in ("", "0")


def load_dataset(cfg: RunConfig) -> GraphDataset:
    if cfg.data.synthetic is not None:
        s = cfg.data.synthetic
        return synthetic_dataset(s["graphs"], s["nodes"], s["seed"])
    result = load_csv(cfg.data.path, cfg.data.smiles_column, cfg.data.target_columns)
    if not result.records:
        raise CommandError(f"dataset {cfg.data.path} has no usable rows")
    return GraphDataset.from_records(result.records)


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- train


def effective_config(cfg: RunConfig, run: int) -> RunConfig:
    """Config of one repeat: seeds fixed, so the copy reruns on its own."""
    return replace(
        cfg,
        split=replace(cfg.split, seed=cfg.split.seed + run % cfg.runtime.split_count),
        train=replace(cfg.train, seed=cfg.train.seed + run),
        runtime=replace(cfg.runtime, runs=1, splits=None),
    )


def run_once(cfg: RunConfig, run_dir: Path) -> dict:
    run_dir.mkdir(parents=True, exist_ok=True)
    data = load_dataset(cfg)
    sp = split(len(data), cfg.split)
    task = TaskSpec.fit(cfg.data.task, data.targets, sp.train)
    model = Model(cfg.model, seed=cfg.train.seed, dtype=np.dtype(cfg.runtime.dtype))
    (run_dir / "config.yaml").write_text(cfg.to_yaml(), encoding="utf-8")
    write_json(run_dir / "split.json", {k: v.tolist() for k, v in sp._asdict().items()})
    result = train(model, data, sp, task, cfg.train, cfg.hash())
    meta = {
        "config_hash": cfg.hash(),
        "model": cfg.model.to_dict(),
        "task": task.to_dict(),
        "dtype": cfg.runtime.dtype,
        "best_epoch": result.history["best_epoch"],
    }
    save_checkpoint(run_dir / "checkpoint.json", result.best_state, meta)
    write_json(run_dir / "history.json", result.history)
    metrics = {"config_hash": cfg.hash(), "test": result.history["test"], "best_valid": result.history["best_valid"]}
    write_json(run_dir / "metrics.json", metrics)
    return metrics


def _run_worker(args) -> dict:
    cfg, run_dir = args
    return run_once(cfg, Path(run_dir))


def aggregate(metrics: list[dict]) -> dict:
    """Mean and sample standard deviation of each scalar test metric."""
    out = {"runs": len(metrics)}
    for key in ("rmse", "r2", "roc_auc"):
        values = [m["test"].get(key) for m in metrics]
        values = [v for v in values if v is not None]
        if values:
            arr = np.array(values, dtype=np.float64)
            out[key] = {
                "mean": float(arr.mean()),
                "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                "values": values,
            }
    return out


def cmd_train(cfg: RunConfig, out_dir: Path, workers: int = 1) -> dict:
    runs = cfg.runtime.runs
    jobs = [(effective_config(cfg, k), str(out_dir / f"run_{k}")) for k in range(runs)]
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers > 1 and runs > 1 and not deterministic():
        with ProcessPoolExecutor(max_workers=min(workers, runs)) as pool:
            results = list(pool.map(_run_worker, jobs))
    else:
        results = [_run_worker(job) for job in jobs]
    summary = aggregate(results)
    summary["config_hash"] = cfg.hash()
    write_json(out_dir / "aggregate.json", summary)
    return summary


# ---------------------------------------------------------------- evaluate


def restore_model(cfg: RunConfig, checkpoint: Path) -> tuple[Model, dict]:
    arrays, meta = load_checkpoint(checkpoint)
    model = Model(cfg.model, seed=cfg.train.seed, dtype=np.dtype(cfg.runtime.dtype))
    model.load_state_dict(arrays)
    return model, meta


def cmd_evaluate(cfg: RunConfig, checkpoint: Path, data_path: Path | None = None, subset: str = "test") -> dict:
    model, meta = restore_model(cfg, checkpoint)
    if data_path is not None:
        cfg = replace(cfg, data=replace(cfg.data, path=str(data_path), synthetic=None))
        data = load_dataset(cfg)
        indices = np.arange(len(data))
    else:
        data = load_dataset(cfg)
        sp = split(len(data), cfg.split)
        indices = np.arange(len(data)) if subset == "all" else getattr(sp, subset)
    if len(indices) == 0:
        raise CommandError("nothing to evaluate: the selected dataset is empty")
    if "task" in meta:
        task = TaskSpec.from_dict(meta["task"])
    else:
        task = TaskSpec.fit(cfg.data.task, data.targets, split(len(data), cfg.split).train)
    return {"config_hash": meta.get("config_hash"), "subset": subset, "metrics": evaluate(model, data, task, indices)}


# ---------------------------------------------------------------- benchmark


def time_training(cfg: RunConfig, data: GraphDataset, epochs: int) -> dict:
    sp = split(len(data), cfg.split)
    task = TaskSpec.fit(cfg.data.task, data.targets, sp.train)
    model = Model(cfg.model, seed=cfg.train.seed, dtype=np.dtype(cfg.runtime.dtype))
    optimizer = Adam(model.parameters(), lr=cfg.train.lr)
    rng = np.random.default_rng(cfg.train.seed)
    train_times, total_times = [], []
    for epoch in range(1, epochs + 1):
        t0 = time.perf_counter()
        train_epoch(model, optimizer, data, task, rng.permutation(sp.train), cfg.train.batch_size, epoch)
        t1 = time.perf_counter()
        evaluate(model, data, task, sp.valid)
        t2 = time.perf_counter()
        train_times.append(t1 - t0)
        total_times.append(t2 - t0)
    return {
        "pooling": cfg.model.pooling,
        "keep_ratio": cfg.model.keep_ratio,
        "epoch_seconds": train_times,
        "mean_epoch_seconds": float(np.mean(train_times)),
        "total_seconds": float(np.sum(total_times)),
    }


def speedup_percent(t_none: float, t_rho: float) -> float:
    """Relative increase in speed, ``(t_none - t_rho) / t_rho`` in percent."""
    return 100.0 * (t_none - t_rho) / t_rho


def cmd_benchmark(cfg: RunConfig, ratios: list[float], epochs: int | None = None) -> dict:
    if not ratios:
        raise CommandError("benchmark needs at least one keep ratio to compare against no pooling")
    for r in ratios:
        if not 0.0 < r <= 1.0:
            raise CommandError(f"keep ratio must lie in (0, 1], got {r}")
    if len(cfg.model.node_channels) < 2:
        raise CommandError("benchmark needs at least two conv layers so that a pooling layer exists")
    epochs = epochs or cfg.train.epochs
    variant = cfg.model.pooling if cfg.model.pooling != NO_POOLING else SIMPLE
    base = replace(cfg, model=replace(cfg.model, pooling=NO_POOLING, keep_ratio=1.0))
    pooled = [replace(cfg, model=replace(cfg.model, pooling=variant, keep_ratio=float(r))) for r in ratios]
    hashes = {c.hash_without_pooling() for c in [base, *pooled]}
    if len(hashes) != 1:
        raise CommandError("benchmark configs differ in more than pooling settings")
    data = load_dataset(cfg)
    reference = time_training(base, data, epochs)
    rows = []
    for c in pooled:
        t = time_training(c, data, epochs)
        t["speedup_percent_epoch"] = speedup_percent(reference["mean_epoch_seconds"], t["mean_epoch_seconds"])
        t["speedup_percent_total"] = speedup_percent(reference["total_seconds"], t["total_seconds"])
        t["epoch_time_reduction"] = 1.0 - t["mean_epoch_seconds"] / reference["mean_epoch_seconds"]
        rows.append(t)
    return {
        "config_hash": hashes.pop(),
        "epochs": epochs,
        "graphs": len(data),
        "mean_nodes": float(np.mean([g.num_nodes for g in data.graphs])),
        "no_pooling": reference,
        "pooled": rows,
    }


# ---------------------------------------------------------------- pool-inspect


def inspect_molecule(model: Model, smiles: str, out_dir: Path, stem: str) -> list[Path]:
    mol = parse_smiles(smiles)
    g = featurize(mol)
    model.eval()
    _, trace = model.forward_with_trace(batch([g]))
    labels = [f"{a.symbol}{k}" for k, a in enumerate(mol.atoms)]
    origin = np.arange(g.num_nodes)
    written = []
    stages = [(t.before, t) for t in trace] + [(trace[-1].after, None)]
    for k, (graph, step) in enumerate(stages):
        names = [labels[i] for i in origin]
        kept = step.kept if step is not None else None
        dot = graph_to_dot(graph.edges, graph.num_nodes, f"{stem}_stage{k}", names, kept)
        doc = {
            "smiles": smiles,
            "stage": k,
            "atoms": names,
            "origin": origin.tolist(),
        }
        if step is not None:
            doc["kept"] = step.kept.tolist()
            doc["scores"] = step.scores.tolist()
            doc["plan"] = json.loads(plan_to_json(step.plan))
        for suffix, text in ((".dot", dot), (".json", graph_to_json(graph.edges, graph.num_nodes, **doc))):
            path = out_dir / f"{stem}_stage{k}{suffix}"
            path.write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
            written.append(path)
        if step is not None:
            origin = origin[step.kept]
    return written


def cmd_pool_inspect(cfg: RunConfig, checkpoint: Path | None, smiles: list[str], out_dir: Path) -> tuple[list[Path], list[str]]:
    """Returns written files and per-molecule failure messages."""
    if cfg.model.pooling == NO_POOLING or len(cfg.model.node_channels) < 2:
        raise CommandError("pool-inspect needs a model with at least one pooling layer")
    if checkpoint is not None:
        model, _ = restore_model(cfg, checkpoint)
    else:
        model = Model(cfg.model, seed=cfg.train.seed, dtype=np.dtype(cfg.runtime.dtype))
    out_dir.mkdir(parents=True, exist_ok=True)
    written, failures = [], []
    for k, s in enumerate(smiles):
        try:
            written += inspect_molecule(model, s, out_dir, f"mol{k}")
        except SmilesError as exc:
            failures.append(f"molecule {k}: {exc}")
    return written, failures

