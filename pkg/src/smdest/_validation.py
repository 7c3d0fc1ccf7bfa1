"""Shared input-validation helpers."""

from __future__ import annotations

import numpy as np

__all__ = ["as_series", "check_probability", "check_positive"]


def as_series(x, name: str = "data") -> np.ndarray:
    """Coerce ``x`` to a 1-D float64 array of finite values.

    Accepts anything array-like, including a single-column 2-D array
    (the sklearn ``(n_samples, 1)`` convention).
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"{name} contains a non-finite value at index {bad}")
    return arr


def check_probability(q: float, name: str = "q") -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"{name} must lie strictly in (0, 1), got {q}")
    return q


def check_positive(v: float, name: str) -> float:
    v = float(v)
    if not (np.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be a positive finite number, got {v}")
    return v
