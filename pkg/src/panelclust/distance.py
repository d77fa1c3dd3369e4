"""Pairwise series dissimilarities and the condensed distance matrix.

Distances between two equal-length series x and y:

* euclidean -- sqrt(sum_t (x_t - y_t)^2), the default;
* manhattan -- sum_t |x_t - y_t|;
* chebyshev -- max_t |x_t - y_t|.

Sums accumulate sequentially in ascending t in double precision, and the
matrix path performs the identical operation sequence per pair, so matrix
entries equal the scalar function bit-for-bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_matrix, as_float_vector, check_labels, check_option, condensed_size

METRICS = ("euclidean", "manhattan", "chebyshev")


def condensed_index(n: int, i: int, j: int) -> int:
    """Position of entry (i, j), i != j, in row-major upper-triangle storage."""
    if i == j:
        raise ValueError("diagonal entries are not stored")
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric zero-diagonal dissimilarities in condensed form.

    ``condensed[condensed_index(n, i, j)]`` holds d(i, j) for i < j; the
    diagonal is implicitly zero.
    """

    labels: list[str]
    condensed: np.ndarray

    def __post_init__(self):
        self.labels = check_labels(self.labels)
        arr = np.array(self.condensed, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != condensed_size(len(self.labels)):
            raise ValueError(
                f"condensed length {arr.shape} does not match "
                f"{len(self.labels)} labels (need n(n-1)/2 entries)")
        if not np.isfinite(arr).all():
            raise ValueError("distances must be finite")
        if (arr < 0).any():
            raise ValueError("distances must be non-negative")
        arr.flags.writeable = False
        self.condensed = arr

    @property
    def n(self) -> int:
        return len(self.labels)

    def value(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.condensed[condensed_index(self.n, i, j)])

    def square(self) -> np.ndarray:
        """Full symmetric matrix with a zero diagonal."""
        n = self.n
        full = np.zeros((n, n), dtype=np.float64)
        start = 0
        for i in range(n - 1):
            row = self.condensed[start:start + n - 1 - i]
            full[i, i + 1:] = row
            full[i + 1:, i] = row
            start += n - 1 - i
        return full

    @classmethod
    def from_square(cls, square, labels=None) -> "DistanceMatrix":
        """Condense a full square matrix; it must be symmetric with a zero diagonal."""
        full = as_float_matrix(square)
        n = full.shape[0]
        if full.shape != (n, n) or n < 2:
            raise ValueError(f"need a square matrix over >= 2 items, got {full.shape}")
        if (np.diag(full) != 0).any():
            raise ValueError("diagonal must be zero")
        scale = max(1.0, float(np.abs(full).max()))
        if float(np.abs(full - full.T).max()) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric")
        if labels is None:
            labels = [str(i) for i in range(n)]
        condensed = np.concatenate([full[i, i + 1:] for i in range(n - 1)])
        return cls(labels=list(labels), condensed=condensed)


def pairwise_distance(x, y, metric="euclidean") -> float:
    """Distance between two equal-length finite series."""
    check_option(metric, METRICS, "metric")
    x = as_float_vector(x)
    y = as_float_vector(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"series length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise ValueError("series must have length >= 1")
    acc = 0.0
    if metric == "euclidean":
        for a, b in zip(x.tolist(), y.tolist()):
            d = a - b
            acc += d * d
        return float(np.sqrt(acc))
    if metric == "manhattan":
        for a, b in zip(x.tolist(), y.tolist()):
            acc += abs(a - b)
        return acc
    for a, b in zip(x.tolist(), y.tolist()):
        acc = max(acc, abs(a - b))
    return acc


def _fill_rows(values, metric, out, n, rows):
    """Distances from each row i in ``rows`` to all rows j > i.

    Accumulates over t in ascending order so every pair sees the same
    IEEE operation sequence as the scalar path.
    """
    T = values.shape[1]
    for i in rows:
        start = condensed_index(n, i, i + 1) if i < n - 1 else 0
        rest = values[i + 1:]
        if rest.shape[0] == 0:
            continue
        acc = np.zeros(rest.shape[0], dtype=np.float64)
        if metric == "euclidean":
            for t in range(T):
                d = values[i, t] - rest[:, t]
                acc += d * d
            np.sqrt(acc, out=acc)
        elif metric == "manhattan":
            for t in range(T):
                acc += np.abs(values[i, t] - rest[:, t])
        else:
            for t in range(T):
                np.maximum(acc, np.abs(values[i, t] - rest[:, t]), out=acc)
        out[start:start + rest.shape[0]] = acc


def _row_chunks(n: int, threads: int):
    """Split rows 0..n-2 into contiguous chunks with balanced pair counts."""
    total = condensed_size(n)
    target = total / threads
    chunks, current, load = [], [], 0.0
    for i in range(n - 1):
        current.append(i)
        load += n - 1 - i
        if load >= target and len(chunks) < threads - 1:
            chunks.append(current)
            current, load = [], 0.0
    if current:
        chunks.append(current)
    return chunks


def distance_matrix(panel, metric="euclidean", labels=None, threads=1) -> DistanceMatrix:
    """Assemble the condensed distance matrix over panel rows.

    ``panel`` may be a PanelSeries or a raw (n, T) array (then ``labels``
    names the rows; defaults to stringified indices). Rows may be processed
    by up to ``threads`` workers; output is bit-identical regardless.
    """
    check_option(metric, METRICS, "metric")
    if hasattr(panel, "values") and hasattr(panel, "entities"):
        values = panel.values
        labels = panel.entities if labels is None else labels
    else:
        values = as_float_matrix(panel)
        labels = [str(i) for i in range(values.shape[0])] if labels is None else labels
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least 2 series")
    if values.shape[1] == 0:
        raise ValueError("series must have length >= 1")
    threads = max(1, int(threads))

    out = np.empty(condensed_size(n), dtype=np.float64)
    if threads == 1:
        _fill_rows(values, metric, out, n, range(n - 1))
    else:
        chunks = _row_chunks(n, threads)
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [pool.submit(_fill_rows, values, metric, out, n, chunk)
                       for chunk in chunks]
            for future in futures:
                future.result()
    return DistanceMatrix(labels=list(labels), condensed=out)


def write_matrix_dump(dm: DistanceMatrix) -> str:
    """Plain-text dump: first line n, then one 'i j d' triple per pair."""
    lines = [str(dm.n)]
    pos = 0
    for i in range(dm.n - 1):
        for j in range(i + 1, dm.n):
            lines.append(f"{i} {j} {dm.condensed[pos]:.17g}")
            pos += 1
    return "\n".join(lines) + "\n"


def read_matrix_dump(text: str, labels=None) -> DistanceMatrix:
    """Inverse of write_matrix_dump."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty matrix dump")
    n = int(lines[0])
    expected = condensed_size(n)
    if len(lines) - 1 != expected:
        raise ValueError(f"matrix dump has {len(lines) - 1} triples, expected {expected}")
    condensed = np.empty(expected, dtype=np.float64)
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"malformed matrix dump line: {line!r}")
        i, j, d = int(parts[0]), int(parts[1]), float(parts[2])
        condensed[condensed_index(n, i, j)] = d
    if labels is None:
        labels = [str(i) for i in range(n)]
    return DistanceMatrix(labels=list(labels), condensed=condensed)
