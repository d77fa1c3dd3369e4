"""Agglomeration against hand fixtures, the naive oracle, and scipy."""
import math

import numpy as np
import pytest
import scipy.cluster.hierarchy as sch

from panelclust import (DistanceMatrix, MergeTree, agglomerate, cophenetic,
                        naive_linkage_oracle, read_tree_dump, write_tree_dump)
from panelclust.linkage import METHODS, ORACLE_MAX_N

from conftest import random_condensed_matrix, random_points_matrix

# Three entities: d(a,b)=2, d(a,c)=6, d(b,c)=8.
TRIPLE = DistanceMatrix(labels=["a", "b", "c"], condensed=[2.0, 6.0, 8.0])


def rescaled(dm, c):
    return DistanceMatrix(labels=dm.labels, condensed=dm.condensed * c)


def test_average_triple():
    tree = agglomerate(TRIPLE, method="average")
    assert tree.records() == [(0, 1, 2.0, 2), (2, 3, 7.0, 3)]


def test_complete_triple():
    tree = agglomerate(TRIPLE, method="complete")
    assert tree.records() == [(0, 1, 2.0, 2), (2, 3, 8.0, 3)]


def test_single_triple():
    tree = agglomerate(TRIPLE, method="single")
    assert tree.records() == [(0, 1, 2.0, 2), (2, 3, 6.0, 3)]


def test_ward_triple():
    tree = agglomerate(TRIPLE, method="ward")
    assert tree.lefts.tolist() == [0, 2]
    assert tree.rights.tolist() == [1, 3]
    # sqrt((2*36 + 2*64 - 4) / 3) = sqrt(196/3) = 14/sqrt(3)
    assert tree.heights[0] == 2.0
    assert abs(tree.heights[1] - 14.0 / math.sqrt(3.0)) < 1e-12


def test_ward_d1_triple():
    tree = agglomerate(TRIPLE, method="ward-d1")
    assert tree.heights[0] == 2.0
    # (2/3)*6 + (2/3)*8 - (1/3)*2 = 26/3, no square root
    assert abs(tree.heights[1] - 26.0 / 3.0) < 1e-12


def test_two_entities():
    pair = DistanceMatrix(labels=["x", "y"], condensed=[3.5])
    for method in METHODS:
        tree = agglomerate(pair, method=method)
        assert tree.records() == [(0, 1, 3.5, 2)]


def test_oracle_campaign_small():
    """Every method agrees with the greedy O(n^3) recomputation."""
    rng = np.random.RandomState(11)
    for trial in range(40):
        n = int(rng.randint(3, 13))
        dm = random_condensed_matrix(rng, n)
        for method in METHODS + ("ward-d1",):
            fast = agglomerate(dm, method=method)
            slow = naive_linkage_oracle(dm, method=method)
            assert fast.matches(slow, height_tol=1e-9), (trial, method)


def test_oracle_campaign_euclidean_points():
    rng = np.random.RandomState(12)
    for trial in range(15):
        n = int(rng.randint(4, 30))
        dm = random_points_matrix(rng, n)
        for method in METHODS:
            fast = agglomerate(dm, method=method)
            slow = naive_linkage_oracle(dm, method=method)
            assert fast.matches(slow, height_tol=1e-9), (trial, method)


def test_oracle_campaign_upper_bound():
    rng = np.random.RandomState(13)
    dm = random_condensed_matrix(rng, ORACLE_MAX_N)
    for method in METHODS:
        fast = agglomerate(dm, method=method)
        slow = naive_linkage_oracle(dm, method=method)
        assert fast.matches(slow, height_tol=1e-9)


def test_oracle_rejects_large_input():
    rng = np.random.RandomState(14)
    dm = random_condensed_matrix(rng, ORACLE_MAX_N + 1)
    with pytest.raises(ValueError, match="oracle"):
        naive_linkage_oracle(dm)


def test_heights_monotone_exact():
    rng = np.random.RandomState(15)
    for trial in range(25):
        n = int(rng.randint(3, 40))
        dm = random_condensed_matrix(rng, n)
        for method in METHODS + ("ward-d1",):
            h = agglomerate(dm, method=method).heights
            assert (np.diff(h) >= 0).all(), (trial, method)


def test_cophenetic_is_ultrametric():
    rng = np.random.RandomState(16)
    for trial in range(12):
        n = int(rng.randint(3, 25))
        dm = random_condensed_matrix(rng, n)
        for method in METHODS:
            tree = agglomerate(dm, method=method)
            full = cophenetic(tree).square()
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        lhs = full[i, k]
                        rhs = max(full[i, j], full[j, k])
                        assert lhs <= rhs + 1e-12


def test_single_linkage_subdominant():
    """Single linkage cophenetic distances never exceed the input."""
    rng = np.random.RandomState(17)
    for _ in range(10):
        n = int(rng.randint(3, 30))
        dm = random_condensed_matrix(rng, n)
        coph = cophenetic(agglomerate(dm, method="single")).condensed
        assert (coph <= dm.condensed + 1e-12).all()


def test_scale_equivariance_power_of_two():
    # c = 2.0 scales every float exactly, so heights must match bit for bit
    rng = np.random.RandomState(18)
    dm = random_condensed_matrix(rng, 20)
    for method in METHODS + ("ward-d1",):
        base = agglomerate(dm, method=method)
        scaled = agglomerate(rescaled(dm, 2.0), method=method)
        assert scaled.lefts.tolist() == base.lefts.tolist()
        assert scaled.rights.tolist() == base.rights.tolist()
        assert (scaled.heights == base.heights * 2.0).all()


def test_scale_equivariance_general():
    rng = np.random.RandomState(19)
    dm = random_condensed_matrix(rng, 20)
    for method in METHODS + ("ward-d1",):
        base = agglomerate(dm, method=method)
        scaled = agglomerate(rescaled(dm, 3.7), method=method)
        assert scaled.lefts.tolist() == base.lefts.tolist()
        np.testing.assert_allclose(scaled.heights, base.heights * 3.7, rtol=1e-12)


def test_determinism_bit_identical():
    rng = np.random.RandomState(20)
    dm = random_condensed_matrix(rng, 31)
    for method in METHODS:
        a = agglomerate(dm, method=method)
        b = agglomerate(dm, method=method)
        assert a.records() == b.records()


def test_all_zero_distances():
    # four coincident entities: any tree shape is valid but heights must
    # be zero and sizes must telescope to n
    dm = DistanceMatrix(labels=list("wxyz"), condensed=np.zeros(6))
    for method in METHODS:
        tree = agglomerate(dm, method=method)
        assert (tree.heights == 0).all()
        assert tree.sizes[-1] == 4


def test_cophenetic_triple():
    tree = agglomerate(TRIPLE, method="average")
    coph = cophenetic(tree, labels=TRIPLE.labels)
    assert coph.condensed.tolist() == [2.0, 7.0, 7.0]
    assert coph.labels == ["a", "b", "c"]


def test_cophenetic_matches_scipy():
    rng = np.random.RandomState(21)
    for _ in range(8):
        n = int(rng.randint(3, 40))
        dm = random_condensed_matrix(rng, n)
        tree = agglomerate(dm, method="average")
        z = np.column_stack([tree.lefts, tree.rights,
                             tree.heights, tree.sizes]).astype(float)
        np.testing.assert_allclose(cophenetic(tree).condensed, sch.cophenet(z),
                                   rtol=0, atol=1e-12)


def test_matches_scipy_linkage():
    rng = np.random.RandomState(22)
    for trial in range(20):
        n = int(rng.randint(3, 60))
        dm = random_condensed_matrix(rng, n)
        for method in METHODS:
            tree = agglomerate(dm, method=method)
            z = sch.linkage(dm.condensed, method=method)
            zl = np.minimum(z[:, 0], z[:, 1]).astype(int)
            zr = np.maximum(z[:, 0], z[:, 1]).astype(int)
            assert tree.lefts.tolist() == zl.tolist(), (trial, method)
            assert tree.rights.tolist() == zr.tolist(), (trial, method)
            np.testing.assert_allclose(tree.heights, z[:, 2],
                                       rtol=1e-12, atol=1e-12)
            assert tree.sizes.tolist() == z[:, 3].astype(int).tolist()


def test_method_validation():
    with pytest.raises(ValueError, match="method"):
        agglomerate(TRIPLE, method="median")
    with pytest.raises(ValueError, match="method"):
        naive_linkage_oracle(TRIPLE, method="centroid")


def test_merge_tree_validation():
    with pytest.raises(ValueError, match="non-decreasing"):
        MergeTree(n=3, lefts=[0, 2], rights=[1, 3],
                  heights=[5.0, 1.0], sizes=[2, 3])
    with pytest.raises(ValueError, match="size"):
        MergeTree(n=3, lefts=[0, 2], rights=[1, 3],
                  heights=[1.0, 2.0], sizes=[2, 2])
    with pytest.raises(ValueError, match="child"):
        MergeTree(n=3, lefts=[0, 0], rights=[1, 1],
                  heights=[1.0, 2.0], sizes=[2, 3])
    with pytest.raises(ValueError, match="merge"):
        MergeTree(n=3, lefts=[0, 4], rights=[1, 2],
                  heights=[1.0, 2.0], sizes=[2, 3])
    with pytest.raises(ValueError, match="negative"):
        MergeTree(n=2, lefts=[0], rights=[1], heights=[-1.0], sizes=[2])


def test_merge_tree_round_trip():
    tree = agglomerate(TRIPLE, method="average")
    again = MergeTree.from_records(3, tree.records())
    assert again.records() == tree.records()
    assert again.min_leaf().tolist() == [0, 1, 2, 0, 0]
    assert again.root_height == 7.0


def test_tree_dump_round_trip():
    rng = np.random.RandomState(23)
    dm = random_condensed_matrix(rng, 17)
    tree = agglomerate(dm, method="ward")
    back = read_tree_dump(write_tree_dump(tree))
    assert back.records() == tree.records()
    assert (back.heights == tree.heights).all()


def test_tree_dump_format():
    tree = agglomerate(TRIPLE, method="average")
    assert write_tree_dump(tree) == "0 1 2 2\n2 3 7 3\n"


def test_tree_dump_malformed():
    with pytest.raises(ValueError, match="empty"):
        read_tree_dump("")
    with pytest.raises(ValueError, match="malformed"):
        read_tree_dump("0 1 2\n")
