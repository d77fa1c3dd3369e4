"""Shared helpers: random instance generators and a tiny Newick reader.

The Newick reader here is written from scratch against the format grammar
(not against the library's writer) so round-trip tests compare two
independent code paths.
"""
import numpy as np

from panelclust import DistanceMatrix, distance_matrix
from panelclust._validation import condensed_size


def random_points_matrix(rng, n, T=5, scale=10.0):
    """Metric DistanceMatrix from random points (triangle inequality holds)."""
    return distance_matrix(rng.rand(n, T) * scale)


def random_condensed_matrix(rng, n, scale=10.0):
    """Arbitrary symmetric dissimilarities; not necessarily metric."""
    condensed = rng.rand(condensed_size(n)) * scale + 0.01
    return DistanceMatrix(labels=[f"e{i}" for i in range(n)], condensed=condensed)


def parse_newick_cophenetic(text):
    """Read a Newick string; return (labels in file order, join-height matrix).

    Entry (i, j) of the returned square matrix is the height of the lowest
    common ancestor of leaves i and j above the leaf ring, computed from
    root-path lengths. Assumes an ultrametric tree (all leaves at equal
    depth), which is what dendrograms produce.
    """
    text = text.strip()
    if not text.endswith(";"):
        raise ValueError("missing terminator")
    pos = 0

    def parse_label():
        nonlocal pos
        if text[pos] == "'":
            pos += 1
            out = []
            while True:
                if text[pos] == "'":
                    if pos + 1 < len(text) and text[pos + 1] == "'":
                        out.append("'")
                        pos += 2
                        continue
                    pos += 1
                    break
                out.append(text[pos])
                pos += 1
            return "".join(out)
        out = []
        while text[pos] not in "():,;":
            out.append(text[pos])
            pos += 1
        return "".join(out)

    def parse_length():
        nonlocal pos
        if text[pos] != ":":
            return 0.0
        pos += 1
        start = pos
        while text[pos] not in "(),;":
            pos += 1
        return float(text[start:pos])

    labels = []
    # Returns (leaf indices under the node, list of (leaf, depth below node)).
    def parse_node():
        nonlocal pos
        if text[pos] == "(":
            pos += 1
            groups = []
            while True:
                groups.append(parse_node())
                if text[pos] == ",":
                    pos += 1
                    continue
                assert text[pos] == ")"
                pos += 1
                break
            length = parse_length()
            all_leaves = [leaf for leaves, _ in groups for leaf in leaves]
            # Record the join height for cross pairs at this node.
            for a in range(len(groups)):
                for b in range(a + 1, len(groups)):
                    for la, da in groups[a][1]:
                        for lb, db in groups[b][1]:
                            # da == db for ultrametric input
                            heights[la][lb] = heights[lb][la] = da
            return all_leaves, [(leaf, d + length)
                                for _, depths in groups for leaf, d in depths]
        name = parse_label()
        length = parse_length()
        idx = len(labels)
        labels.append(name)
        return [idx], [(idx, length)]

    class _Auto(dict):
        def __missing__(self, key):
            self[key] = {}
            return self[key]

    heights = _Auto()
    parse_node()
    n = len(labels)
    out = np.zeros((n, n))
    for i in heights:
        for j, h in heights[i].items():
            out[i, j] = h
    return labels, out
