"""Flat cluster assignments from merge trees, plus Newick serialization.

A dendrogram is flattened either by count (undo the last k-1 merges) or by
height (keep merges at height <= h). Cuts number the resulting clusters
canonically: cluster 0 contains the lowest entity index, cluster 1 the
lowest index not in cluster 0, and so on. ``relabel_by_score`` renumbers
an assignment by descending cluster mean for report ordering, trading the
canonical numbering for a presentation one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_vector, check_labels
from .linkage import MergeTree

SCHEMA_VERSION = 1

_NEWICK_RESERVED = set("()[]':;,")


@dataclass(eq=False)
class ClusterAssignment:
    """Partition of n labeled entities into k clusters numbered 0..k-1."""

    labels: list[str]
    cluster_of: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = check_labels(self.labels)
        arr = np.array(self.cluster_of, dtype=np.int64)
        if arr.shape != (len(self.labels),):
            raise ValueError("cluster_of must assign exactly one id per entity")
        k = int(self.k)
        if not 1 <= k <= len(self.labels):
            raise ValueError(f"k must be in 1..{len(self.labels)}, got {k}")
        if ((arr < 0) | (arr >= k)).any():
            raise ValueError("cluster ids must lie in 0..k-1")
        if (np.bincount(arr, minlength=k) == 0).any():
            raise ValueError("every cluster id in 0..k-1 must be non-empty")
        arr.flags.writeable = False
        self.cluster_of = arr
        self.k = k

    @property
    def n(self) -> int:
        return len(self.labels)

    def members_of(self, c: int) -> np.ndarray:
        """Entity indices in cluster c, ascending."""
        return np.flatnonzero(self.cluster_of == c)

    def member_labels(self, c: int) -> list[str]:
        return [self.labels[i] for i in self.members_of(c)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.cluster_of, minlength=self.k)


def cut_by_count(tree: MergeTree, labels, k: int) -> ClusterAssignment:
    """Undo the last k-1 merges; the surviving groups are the clusters."""
    labels = check_labels(labels)
    n = tree.n
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for a tree over {n} leaves")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    parent = np.arange(2 * n - 1, dtype=np.int64)
    for j in range(n - k):
        parent[tree.lefts[j]] = n + j
        parent[tree.rights[j]] = n + j
    cluster_of = np.empty(n, dtype=np.int64)
    canonical: dict[int, int] = {}
    for i in range(n):
        r = i
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        cluster_of[i] = canonical.setdefault(r, len(canonical))
    return ClusterAssignment(labels=labels, cluster_of=cluster_of, k=k)


def cut_by_height(tree: MergeTree, labels, h: float) -> ClusterAssignment:
    """Clusters are the groups connected by merges with height <= h."""
    h = float(h)
    if not np.isfinite(h) or h < 0:
        raise ValueError(f"cut height must be finite and >= 0, got {h}")
    k = 1 + int((tree.heights > h).sum())
    return cut_by_count(tree, labels, k)


def relabel_by_score(assignment: ClusterAssignment, scores) -> ClusterAssignment:
    """Renumber clusters by descending mean score (ties keep canonical order).

    Cluster 0 of the result has the highest mean, matching the convention
    of reporting the top-scoring cluster first.
    """
    scores = as_float_vector(scores)
    if scores.shape != (assignment.n,):
        raise ValueError("need one score per entity")
    means = np.array([scores[assignment.members_of(c)].mean()
                      for c in range(assignment.k)])
    display = np.argsort(-means, kind="stable")
    new_id_of_old = np.empty(assignment.k, dtype=np.int64)
    new_id_of_old[display] = np.arange(assignment.k)
    return ClusterAssignment(labels=assignment.labels,
                             cluster_of=new_id_of_old[assignment.cluster_of],
                             k=assignment.k)


def _newick_name(label: str, quote: bool) -> str:
    risky = any(c in _NEWICK_RESERVED or c.isspace() for c in label)
    if not risky:
        return label
    if not quote:
        raise ValueError(
            f"label {label!r} contains Newick-reserved characters; pass quote=True")
    return "'" + label.replace("'", "''") + "'"


def to_newick(tree: MergeTree, labels, quote: bool = False) -> str:
    """Rooted Newick string with branch lengths.

    A child's branch length is its parent's merge height minus its own
    height (0 for leaves), so every leaf's root-path length equals the root
    height. At each junction the child containing the lowest leaf index is
    written first. Built iteratively: trees of 10^4+ leaves must not hit
    the interpreter recursion limit.
    """
    labels = check_labels(labels)
    n = tree.n
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for a tree over {n} leaves")
    names = [_newick_name(lab, quote) for lab in labels]
    min_leaf = tree.min_leaf()
    pieces: list[str] = []
    # Work stack of ("text", literal) and ("node", id, parent height) items.
    stack: list[tuple] = [("node", 2 * n - 2, None)]
    while stack:
        item = stack.pop()
        if item[0] == "text":
            pieces.append(item[1])
            continue
        node, parent_h = item[1], item[2]
        if node < n:
            length = "" if parent_h is None else f":{parent_h:.17g}"
            pieces.append(names[node] + length)
            continue
        k = node - n
        h = float(tree.heights[k])
        length = "" if parent_h is None else f":{parent_h - h:.17g}"
        left, right = int(tree.lefts[k]), int(tree.rights[k])
        if min_leaf[left] > min_leaf[right]:
            left, right = right, left
        stack.append(("text", ")" + length))
        stack.append(("node", right, h))
        stack.append(("text", ","))
        stack.append(("node", left, h))
        stack.append(("text", "("))
    return "".join(pieces) + ";"


def write_assignment_json(assignment: ClusterAssignment) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "k": assignment.k,
        "clusters": [{"id": c, "members": assignment.member_labels(c)}
                     for c in range(assignment.k)],
    }
    return json.dumps(doc, indent=2) + "\n"


def read_assignment_json(text: str, labels) -> ClusterAssignment:
    """Rebuild an assignment against the given entity labels."""
    labels = check_labels(labels)
    doc = json.loads(text)
    clusters = doc["clusters"]
    if len(clusters) != int(doc["k"]):
        raise ValueError("cluster list does not match the declared k")
    index_of = {lab: i for i, lab in enumerate(labels)}
    cluster_of = np.full(len(labels), -1, dtype=np.int64)
    for entry in clusters:
        c = int(entry["id"])
        for lab in entry["members"]:
            if lab not in index_of:
                raise ValueError(f"assignment names unknown entity {lab!r}")
            i = index_of[lab]
            if cluster_of[i] != -1:
                raise ValueError(f"entity {lab!r} assigned twice")
            cluster_of[i] = c
    if (cluster_of == -1).any():
        missing = [labels[i] for i in np.flatnonzero(cluster_of == -1)]
        raise ValueError(f"entities missing from assignment: {missing}")
    return ClusterAssignment(labels=labels, cluster_of=cluster_of, k=int(doc["k"]))
