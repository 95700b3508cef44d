"""``molpool`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..autodiff import CheckpointError
from ..chem import DatasetError
from ..train import FROM_FILE, SplitError, TrainingDiverged, UndefinedMetricError
from . import commands
from .config import ConfigError, load_config

log = logging.getLogger("molpool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="molpool", description="Graph pooling models for molecular property prediction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train and test one or more runs")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--runs", type=int, help="number of repeats (overrides runtime.runs)")
    p.add_argument("--seed", type=int, help="base seed for weights and split (overrides train.seed and split.seed)")
    p.add_argument("--split-file", type=Path, help="JSON file with train/valid/test index lists")
    p.add_argument("--parallel", type=int, default=1, metavar="N", help="run up to N repeats in separate processes")

    p = sub.add_parser("evaluate", help="score a checkpoint without training")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--data", type=Path, help="CSV to score in full instead of the configured split")
    p.add_argument("--subset", choices=("train", "valid", "test", "all"), default="test")
    p.add_argument("--split-file", type=Path)
    p.add_argument("--out", type=Path, help="also write the metrics JSON here")

    p = sub.add_parser("benchmark", help="time training with and without pooling")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--ratios", type=float, nargs="*", default=None, help="keep ratios to compare (default 0.5)")
    p.add_argument("--epochs", type=int, help="epochs per timed run (default train.epochs)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", type=Path)

    p = sub.add_parser("pool-inspect", help="write DOT/JSON of molecules before and after each pooling layer")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--checkpoint", type=Path, help="trained weights (default: freshly initialised model)")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("smiles", nargs="+")
    return parser


def _apply_overrides(cfg, args):
    seed = getattr(args, "seed", None)
    if seed is not None:
        cfg = replace(cfg, train=replace(cfg.train, seed=seed), split=replace(cfg.split, seed=seed))
    split_file = getattr(args, "split_file", None)
    if split_file is not None:
        cfg = replace(cfg, split=replace(cfg.split, mode=FROM_FILE, path=str(split_file.resolve())))
    runs = getattr(args, "runs", None)
    if runs is not None:
        if runs < 1:
            raise ConfigError("--runs must be at least 1")
        cfg = replace(cfg, runtime=replace(cfg.runtime, runs=runs))
    return cfg


def _emit(doc, out: Path | None = None) -> None:
    text = json.dumps(doc, indent=2)
    print(text)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "train":
            summary = commands.cmd_train(cfg, args.out_dir, args.parallel)
            _emit(summary)
        elif args.command == "evaluate":
            _emit(commands.cmd_evaluate(cfg, args.checkpoint, args.data, args.subset), args.out)
        elif args.command == "benchmark":
            ratios = [0.5] if args.ratios is None else args.ratios
            report = commands.cmd_benchmark(cfg, ratios, args.epochs)
            _emit(report, args.out_dir / "benchmark.json" if args.out_dir else None)
        elif args.command == "pool-inspect":
            written, failures = commands.cmd_pool_inspect(cfg, args.checkpoint, args.smiles, args.out_dir)
            for msg in failures:
                print(f"warning: skipped {msg}", file=sys.stderr)
            for path in written:
                print(path)
            if not written:
                return 1
    except (commands.CommandError, CheckpointError, DatasetError, SplitError, UndefinedMetricError, TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # shape mismatches on checkpoint load name the offending layer
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
