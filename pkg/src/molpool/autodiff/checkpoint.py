"""Parameter checkpoint files.

Format (JSON, UTF-8)::

    {
      "format": "molpool-checkpoint",
      "version": 1,
      "arrays": {
        "<name>": {"shape": [d0, d1, ...], "dtype": "<f8", "data": "<base64>"},
        ...
      },
      "meta": {...}            # optional free-form JSON object
    }

``data`` is the base64 encoding of the array's raw bytes in C order with
little-endian byte order; ``dtype`` is a numpy type string and is always
little-endian (``<f4`` or ``<f8``).  Loading is bit-exact.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path
from typing import Mapping

import numpy as np

FORMAT_NAME = "molpool-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def encode_arrays(arrays: Mapping[str, np.ndarray], meta: dict | None = None) -> dict:
    payload = {}
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        le = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        payload[name] = {
            "shape": list(arr.shape),
            "dtype": le.dtype.str,
            "data": base64.b64encode(le.tobytes()).decode("ascii"),
        }
    return {"format": FORMAT_NAME, "version": FORMAT_VERSION, "arrays": payload, "meta": meta or {}}


def decode_arrays(doc: dict) -> tuple[dict[str, np.ndarray], dict]:
    if doc.get("format") != FORMAT_NAME:
        raise CheckpointError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    arrays = {}
    for name, entry in doc["arrays"].items():
        raw = base64.b64decode(entry["data"])
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        arrays[name] = arr.astype(arr.dtype.newbyteorder("="))
    return arrays, doc.get("meta", {})


def save_checkpoint(path, arrays: Mapping[str, np.ndarray], meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(encode_arrays(arrays, meta)), encoding="utf-8")


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_arrays(doc)
