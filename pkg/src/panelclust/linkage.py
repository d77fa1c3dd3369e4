"""Agglomerative clustering over a DistanceMatrix.

Starting from singletons, repeatedly merge the closest pair of clusters
and update inter-cluster distances by the Lance-Williams recurrence

    d(k, i+j) = a_i d(k,i) + a_j d(k,j) + b d(i,j) + g |d(k,i) - d(k,j)|

with method-specific coefficients:

* average  -- a_i = |i|/(|i|+|j|), b = 0, g = 0 (UPGMA, the default);
* complete -- a = 1/2, g = 1/2 (equals the cross-pair maximum);
* single   -- a = 1/2, g = -1/2 (equals the cross-pair minimum);
* ward     -- applied to squared distances with a_i = (|i|+|k|)/(|i|+|j|+|k|),
  b = -|k|/(|i|+|j|+|k|), heights reported as square roots (the "ward.D2"
  convention); "ward-d1" runs the same coefficients on raw distances and
  reports raw heights.

Two routes produce the tree. ``agglomerate`` is the production path: the
nearest-neighbor-chain algorithm (valid here because all supported methods
are reducible) followed by a stable sort of merges by height, O(n^2) time.
``naive_linkage_oracle`` is the literal greedy algorithm, O(n^3), kept as
an independent verification anchor. On tie-free input both emit the same
tree; at exact-distance ties the oracle picks the lexicographically least
pair while the chain's order is deterministic but unspecified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_option, condensed_size
from .distance import DistanceMatrix

METHODS = ("average", "complete", "single", "ward")
# Accepted everywhere a method is, but deliberately not in METHODS: the
# ward.D2 convention above is the supported Ward variant.
WARD_D1 = "ward-d1"
_ALL_METHODS = METHODS + (WARD_D1,)

ORACLE_MAX_N = 64


@dataclass(eq=False)
class MergeTree:
    """Dendrogram as an ordered sequence of n-1 merges.

    Node ids 0..n-1 are leaves; merge k creates node id n+k. Each merge
    stores its two children (left < right), its height, and the member
    count of the new cluster. Heights are non-negative and non-decreasing
    (all supported linkages are monotone).
    """

    n: int
    lefts: np.ndarray
    rights: np.ndarray
    heights: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise ValueError("need at least 2 leaves")
        self.n = n
        m = n - 1
        lefts = np.asarray(self.lefts, dtype=np.int64)
        rights = np.asarray(self.rights, dtype=np.int64)
        heights = np.array(self.heights, dtype=np.float64)
        sizes = np.array(self.sizes, dtype=np.int64)
        for arr, what in ((lefts, "lefts"), (rights, "rights"),
                          (heights, "heights"), (sizes, "sizes")):
            if arr.shape != (m,):
                raise ValueError(f"{what} must have shape ({m},), got {arr.shape}")
        lo = np.minimum(lefts, rights)
        hi = np.maximum(lefts, rights)
        if (lo == hi).any():
            raise ValueError("a merge cannot join a node with itself")
        if (lo < 0).any():
            raise ValueError("negative node id")
        if (hi >= n + np.arange(m)).any():
            raise ValueError("merge references a node created later")
        counts = np.bincount(np.concatenate([lo, hi]), minlength=2 * n - 1)
        if (counts[:2 * n - 2] != 1).any():
            raise ValueError("every node except the root must be a child exactly once")
        if not np.isfinite(heights).all() or (heights < 0).any():
            raise ValueError("heights must be finite and non-negative")
        if m > 1 and (np.diff(heights) < 0).any():
            raise ValueError("heights must be non-decreasing")
        node_size = np.ones(2 * n - 1, dtype=np.int64)
        node_size[n:] = sizes
        if (sizes != node_size[lo] + node_size[hi]).any():
            raise ValueError("merge size must equal the sum of its children's sizes")
        for arr in (lo, hi, heights, sizes):
            arr.flags.writeable = False
        self.lefts, self.rights, self.heights, self.sizes = lo, hi, heights, sizes

    @property
    def root_height(self) -> float:
        return float(self.heights[-1])

    def records(self) -> list[tuple[int, int, float, int]]:
        """Merges as plain (left, right, height, size) tuples."""
        return [(int(l), int(r), float(h), int(s))
                for l, r, h, s in zip(self.lefts, self.rights, self.heights, self.sizes)]

    @classmethod
    def from_records(cls, n: int, records) -> "MergeTree":
        rec = list(records)
        return cls(n=n,
                   lefts=np.array([r[0] for r in rec], dtype=np.int64),
                   rights=np.array([r[1] for r in rec], dtype=np.int64),
                   heights=np.array([r[2] for r in rec], dtype=np.float64),
                   sizes=np.array([r[3] for r in rec], dtype=np.int64))

    def min_leaf(self) -> np.ndarray:
        """Lowest leaf index under each node id, leaves included."""
        out = np.empty(2 * self.n - 1, dtype=np.int64)
        out[:self.n] = np.arange(self.n)
        for k in range(self.n - 1):
            out[self.n + k] = min(out[self.lefts[k]], out[self.rights[k]])
        return out

    def matches(self, other: "MergeTree", height_tol: float = 0.0) -> bool:
        """Same merge sequence with heights equal within height_tol."""
        if self.n != other.n:
            return False
        if (self.lefts != other.lefts).any() or (self.rights != other.rights).any():
            return False
        return bool(np.abs(self.heights - other.heights).max() <= height_tol)


def _lw_update(method, dkx, dky, dxy, sx, sy, sk):
    """New distance from cluster k to the merge of x and y.

    For complete and single the recurrence collapses to an exact max/min,
    used directly to avoid needless rounding. Ward is evaluated in whatever
    domain (squared or raw) the caller tracks.
    """
    if method == "average":
        return (sx * dkx + sy * dky) / (sx + sy)
    if method == "complete":
        return np.maximum(dkx, dky)
    if method == "single":
        return np.minimum(dkx, dky)
    s = sx + sy + sk
    out = ((sx + sk) * dkx + (sy + sk) * dky - sk * dxy) / s
    # Exact arithmetic keeps Ward distances non-negative; cancellation in
    # floating point can leave a tiny negative behind. Clamp it.
    return np.maximum(out, 0.0)


def agglomerate(D: DistanceMatrix, method: str = "average") -> MergeTree:
    """Cluster by repeatedly merging the globally closest pair.

    Internally runs the nearest-neighbor chain, which discovers merges in
    a different order than the greedy scan but the same set; a stable sort
    by height then reproduces the greedy sequence. Single-threaded and
    deterministic: identical input gives a bit-identical tree.
    """
    check_option(method, _ALL_METHODS, "method")
    n = D.n
    coeff = "ward" if method == WARD_D1 else method
    d = D.square()
    if method == "ward":
        d *= d
    np.fill_diagonal(d, np.inf)

    alive = np.ones(n, dtype=bool)
    size = np.ones(n, dtype=np.int64)
    slot_a = np.empty(n - 1, dtype=np.int64)
    slot_b = np.empty(n - 1, dtype=np.int64)
    raw_height = np.empty(n - 1, dtype=np.float64)
    chain: list[int] = []

    for k in range(n - 1):
        if not chain:
            chain.append(int(np.flatnonzero(alive)[0]))
        while True:
            x = chain[-1]
            row = d[x]
            # Nearest live neighbor of x; on ties prefer the chain's
            # predecessor so a reciprocal pair terminates the walk.
            if len(chain) > 1:
                y = chain[-2]
                current = row[y]
            else:
                y = -1
                current = np.inf
            cand = int(np.argmin(row))
            if row[cand] < current:
                y, current = cand, row[cand]
            if len(chain) > 1 and y == chain[-2]:
                break
            chain.append(y)
        x = chain.pop()
        y = chain.pop()
        if x > y:
            x, y = y, x
        sx, sy = int(size[x]), int(size[y])
        height = float(d[x, y])
        slot_a[k], slot_b[k], raw_height[k] = x, y, height

        # Merged cluster takes over slot y (which always contains leaf y);
        # slot x dies. Distances from dead slots stay +inf.
        alive[x] = False
        idx = np.flatnonzero(alive)
        idx = idx[idx != y]
        new = _lw_update(coeff, d[x, idx], d[y, idx], height,
                         sx, sy, size[idx].astype(np.float64))
        d[y, idx] = new
        d[idx, y] = new
        d[x, :] = np.inf
        d[:, x] = np.inf
        size[y] = sx + sy

    heights = raw_height
    if method == "ward":
        np.sqrt(heights, out=heights)
    order = np.argsort(heights, kind="stable")
    lefts, rights, sizes = _label(slot_a[order], slot_b[order], n)
    return MergeTree(n=n, lefts=lefts, rights=rights,
                     heights=heights[order], sizes=sizes)


def _label(slot_a, slot_b, n):
    """Convert slot-level merges, sorted by height, to dendrogram node ids.

    Union-find over slots: slot s always holds a cluster containing leaf s,
    so following s to its current root yields the node id of that cluster.
    """
    parent = np.arange(2 * n - 1, dtype=np.int64)
    node_size = np.ones(2 * n - 1, dtype=np.int64)
    lefts = np.empty(n - 1, dtype=np.int64)
    rights = np.empty(n - 1, dtype=np.int64)
    sizes = np.empty(n - 1, dtype=np.int64)

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    for k in range(n - 1):
        ra, rb = find(int(slot_a[k])), find(int(slot_b[k]))
        new = n + k
        parent[ra] = new
        parent[rb] = new
        node_size[new] = node_size[ra] + node_size[rb]
        lefts[k], rights[k] = min(ra, rb), max(ra, rb)
        sizes[k] = node_size[new]
    return lefts, rights, sizes


def naive_linkage_oracle(D: DistanceMatrix, method: str = "average",
                         max_n: int = ORACLE_MAX_N) -> MergeTree:
    """Reference implementation by the most literal greedy strategy.

    At every step, scan all live cluster pairs in ascending id order and
    merge the closest; strict comparison makes the winner at ties the pair
    with the least smaller id, then the least larger id. For average,
    complete, and single the inter-cluster distance is recomputed from the
    original matrix each time (mean, max, min over cross pairs); Ward is
    not a function of cross pairs alone, so its distances are carried by
    the Lance-Williams recurrence.

    Deliberately O(n^3) and entirely independent of agglomerate; refuses
    inputs larger than max_n.
    """
    check_option(method, _ALL_METHODS, "method")
    n = D.n
    if n > max_n:
        raise ValueError(f"oracle limited to n <= {max_n}, got {n}")
    orig = D.square()
    ward_like = method in ("ward", WARD_D1)
    carried: dict[tuple[int, int], float] = {}
    if ward_like:
        base = orig ** 2 if method == "ward" else orig
        for i in range(n):
            for j in range(i + 1, n):
                carried[(i, j)] = float(base[i, j])

    members = {i: (i,) for i in range(n)}
    records = []
    for step in range(n - 1):
        ids = sorted(members)
        best = math.inf
        best_pair = None
        for p in range(len(ids)):
            for q in range(p + 1, len(ids)):
                a, b = ids[p], ids[q]
                if ward_like:
                    dist = carried[(a, b)]
                elif method == "average":
                    total = 0.0
                    for u in members[a]:
                        for v in members[b]:
                            total += orig[u, v]
                    dist = total / (len(members[a]) * len(members[b]))
                elif method == "complete":
                    dist = max(orig[u, v] for u in members[a] for v in members[b])
                else:
                    dist = min(orig[u, v] for u in members[a] for v in members[b])
                if dist < best:
                    best = dist
                    best_pair = (a, b)
        a, b = best_pair
        new = n + step
        if ward_like:
            sa, sb = len(members[a]), len(members[b])
            for k in ids:
                if k == a or k == b:
                    continue
                sk = len(members[k])
                dka = carried[(k, a) if k < a else (a, k)]
                dkb = carried[(k, b) if k < b else (b, k)]
                upd = ((sa + sk) * dka + (sb + sk) * dkb - sk * best) / (sa + sb + sk)
                carried[(k, new)] = max(upd, 0.0)
        height = math.sqrt(best) if method == "ward" else best
        members[new] = tuple(sorted(members[a] + members[b]))
        records.append((a, b, height, len(members[new])))
        del members[a], members[b]
    return MergeTree.from_records(n, records)


def cophenetic(tree: MergeTree, labels=None) -> DistanceMatrix:
    """Cophenetic distances: d(i,j) is the height of the lowest merge joining i and j.

    Ultrametric by construction for monotone linkages.
    """
    n = tree.n
    out = np.empty(condensed_size(n), dtype=np.float64)
    members: list = [np.array([i], dtype=np.int64) for i in range(n)]
    for k in range(n - 1):
        A = members[tree.lefts[k]]
        B = members[tree.rights[k]]
        a = np.repeat(A, B.shape[0])
        b = np.tile(B, A.shape[0])
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        out[n * lo - lo * (lo + 1) // 2 + hi - lo - 1] = tree.heights[k]
        members.append(np.concatenate([A, B]))
    if labels is None:
        labels = [str(i) for i in range(n)]
    return DistanceMatrix(labels=list(labels), condensed=out)


def write_tree_dump(tree: MergeTree) -> str:
    """One line per merge: `left right height size`."""
    return "".join(f"{l} {r} {h:.17g} {s}\n" for l, r, h, s in tree.records())


def read_tree_dump(text: str) -> MergeTree:
    """Inverse of write_tree_dump; leaf count is implied by the line count."""
    records = []
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"malformed tree dump line: {line!r}")
        records.append((int(parts[0]), int(parts[1]), float(parts[2]), int(parts[3])))
    if not records:
        raise ValueError("empty tree dump")
    return MergeTree.from_records(len(records) + 1, records)
