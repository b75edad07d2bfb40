"""Small shared helpers: deterministic hashing, CSV emission, worker pools."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Sequence

import numpy as np


def config_hash(obj: Any) -> str:
    """Stable short hash of a JSON-serializable configuration."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonify)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonify(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON-serializable: {type(x)}")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with mandatory header row and '.' decimals (repr of floats)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(c) for c in row])


def _csv_cell(c):
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    if isinstance(c, (np.integer,)):
        return int(c)
    return c


def worker_count() -> int:
    return max(1, int(os.environ.get("BVDISP_WORKERS", "1")))


def ordered_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """Map with a thread pool, results collected in input order."""
    n = worker_count() if workers is None else workers
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
