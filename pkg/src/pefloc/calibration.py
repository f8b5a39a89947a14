"""Disk cache for Monte Carlo calibration artifacts.

Calibration (null-statistic samples, confidence bands) is by far the most
expensive part of repeated runs, yet it depends only on the parameter key
``(kind, alpha, NT, T, A, B, h_max/lags, M, level, seed)``.  The cache keys
include the seed, so runs never silently reuse tables produced under a
different stream.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

__all__ = ["CalibrationCache", "default_cache_dir"]

ENV_VAR = "PEFLOC_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "pefloc"


class CalibrationCache:
    """Maps a JSON-serializable key to a float array, persisted on disk."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()
        self._mem: dict[str, np.ndarray] = {}

    def _digest(self, key) -> str:
        blob = json.dumps(key, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:32]

    def get_or_compute(self, key, compute) -> np.ndarray:
        digest = self._digest(key)
        if digest in self._mem:
            return self._mem[digest]
        path = self.root / f"{digest}.json"
        if path.exists():
            with open(path) as f:
                payload = json.load(f)
            if payload["key"] == json.loads(json.dumps(key, default=str)):
                arr = np.asarray(payload["values"], dtype=float)
                self._mem[digest] = arr
                return arr
        arr = np.asarray(compute(), dtype=float)
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as f:
            json.dump({"key": key, "values": arr.tolist()}, f, default=str)
        os.replace(tmp, path)
        self._mem[digest] = arr
        return arr
