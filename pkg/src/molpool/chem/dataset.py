from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

from .smiles import Molecule, SmilesError, parse_smiles

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


@dataclass
class DatasetRecord:
    smiles: str
    targets: tuple[float | None, ...]
    molecule: Molecule | None = None


class LoadResult(NamedTuple):
    records: list[DatasetRecord]
    skipped: int


def load_csv(path, smiles_column: str, target_columns: Sequence[str]) -> LoadResult:
    """Read a UTF-8 CSV with a header row.

    Rows whose SMILES fail to parse are skipped (and counted); empty
    target cells become ``None``.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in [smiles_column, *target_columns] if c not in header]
        if missing:
            raise DatasetError(f"{path}: missing column(s) {missing}; header is {header}")
        records, skipped = [], 0
        for line, row in enumerate(reader, start=2):
            smiles = (row[smiles_column] or "").strip()
            try:
                mol = parse_smiles(smiles)
            except SmilesError as exc:
                log.warning("%s line %d: skipping unparseable SMILES: %s", path, line, exc)
                skipped += 1
                continue
            targets = []
            for col in target_columns:
                cell = (row[col] or "").strip()
                if cell == "":
                    targets.append(None)
                    continue
                try:
                    targets.append(float(cell))
                except ValueError as exc:
                    raise DatasetError(f"{path} line {line}: non-numeric {col}={cell!r}") from exc
            records.append(DatasetRecord(smiles, tuple(targets), mol))
    if skipped:
        log.warning("%s: skipped %d row(s) with invalid SMILES", path, skipped)
    return LoadResult(records, skipped)
