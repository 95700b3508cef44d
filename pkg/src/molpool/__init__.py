"""Sparse hierarchical graph networks for molecular property prediction.

Set ``MOLPOOL_DETERMINISTIC=1`` before importing to pin BLAS/OpenMP to one
thread and run repeats sequentially, so reruns are bitwise identical.
"""

import os as _os

if _os.environ.get("MOLPOOL_DETERMINISTIC", "") not in ("", "0"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, "1")

__version__ = "0.1.0"
