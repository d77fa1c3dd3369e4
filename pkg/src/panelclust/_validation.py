"""Shared input-validation helpers."""
from __future__ import annotations

import numpy as np


def check_labels(labels) -> list[str]:
    """Validate entity labels: unique, non-empty strings. Returns a list copy."""
    labels = [str(lab) for lab in labels]
    for lab in labels:
        if not lab:
            raise ValueError("entity labels must be non-empty")
    seen = set()
    for lab in labels:
        if lab in seen:
            raise ValueError(f"duplicate entity label: {lab!r}")
        seen.add(lab)
    return labels


def as_float_matrix(values, n_rows=None) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix of series values, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError("series values must be finite (no NaN/inf)")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} rows, got {arr.shape[0]}")
    return arr


def as_float_vector(values) -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError("values must be finite (no NaN/inf)")
    return arr


def check_option(value: str, allowed, what: str) -> str:
    if value not in allowed:
        raise ValueError(f"unknown {what}: {value!r} (choose from {', '.join(allowed)})")
    return value


def condensed_size(n: int) -> int:
    return n * (n - 1) // 2
