"""scikit-learn style estimator facade over the clustering pipeline.

Wraps distance computation, agglomeration, and tree cutting behind the
familiar fit/fit_predict surface so the clusterer drops into sklearn
pipelines and model-selection tooling. There is deliberately no predict
or transform: hierarchical clustering is transductive, so out-of-sample
assignment is undefined (same stance as sklearn's own agglomerative
clusterer).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .distance import METRICS, DistanceMatrix, distance_matrix
from .linkage import _ALL_METHODS, agglomerate
from .panel import PanelSeries
from .tree import cut_by_count, cut_by_height


class AgglomerativeSeriesClustering(ClusterMixin, BaseEstimator):
    """Agglomerative clustering of fixed-length series.

    Parameters
    ----------
    n_clusters : int or None, default 4
        Cut the tree into this many clusters. Set to None when cutting by
        height instead; exactly one of n_clusters and height must be set.
    height : float or None, default None
        Cut the tree at this merge height.
    metric : str, default "euclidean"
        One of "euclidean", "manhattan", "chebyshev", or "precomputed"
        (then X must be a square distance matrix or a DistanceMatrix).
    method : str, default "average"
        Linkage: "average", "complete", "single", "ward", or "ward-d1".

    Attributes
    ----------
    labels_ : cluster id per sample (canonical numbering: cluster 0 holds
        sample 0, cluster 1 the first sample outside it, and so on)
    merge_tree_ : the full MergeTree
    assignment_ : the ClusterAssignment behind labels_
    distance_matrix_ : the DistanceMatrix that was clustered
    n_clusters_ : number of clusters actually produced
    """

    def __init__(self, n_clusters=4, height=None, metric="euclidean",
                 method="average"):
        self.n_clusters = n_clusters
        self.height = height
        self.metric = metric
        self.method = method

    def _to_distance_matrix(self, X) -> DistanceMatrix:
        if self.metric == "precomputed":
            if isinstance(X, DistanceMatrix):
                return X
            if isinstance(X, PanelSeries):
                raise ValueError("metric='precomputed' expects distances, not a panel")
            return DistanceMatrix.from_square(check_array(X, dtype=np.float64))
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if isinstance(X, DistanceMatrix):
            raise ValueError("got a DistanceMatrix; use metric='precomputed'")
        if isinstance(X, PanelSeries):
            return distance_matrix(X, metric=self.metric)
        X = check_array(X, dtype=np.float64, ensure_min_samples=2,
                        ensure_min_features=1)
        self.n_features_in_ = X.shape[1]
        return distance_matrix(X, metric=self.metric)

    def fit(self, X, y=None):
        """Cluster X and store the tree and the flat assignment."""
        if (self.n_clusters is None) == (self.height is None):
            raise ValueError("set exactly one of n_clusters and height")
        if self.method not in _ALL_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        dm = self._to_distance_matrix(X)
        tree = agglomerate(dm, method=self.method)
        if self.height is not None:
            assignment = cut_by_height(tree, dm.labels, self.height)
        else:
            assignment = cut_by_count(tree, dm.labels, int(self.n_clusters))
        self.distance_matrix_ = dm
        self.merge_tree_ = tree
        self.assignment_ = assignment
        self.labels_ = np.array(assignment.cluster_of)
        self.n_clusters_ = assignment.k
        return self

    def fit_predict(self, X, y=None):
        """Cluster X and return the per-sample cluster ids."""
        return self.fit(X).labels_

    def __sklearn_is_fitted__(self):
        return hasattr(self, "labels_")
