"""Agglomerative clustering of panel time series.

Pipeline pieces, composable as plain functions: load a rectangular panel
(entity x year), compute pairwise series distances, agglomerate into a
merge tree, cut the tree into clusters, summarize per-cluster statistics,
and export trees as Newick or SVG dendrograms. A scikit-learn style
estimator (AgglomerativeSeriesClustering) wraps the fit/cut path.
"""
from .panel import (CovariateMap, PanelSeries, check_value_range,
                    load_covariate, load_panel, write_panel_wide)
from .distance import (METRICS, DistanceMatrix, distance_matrix,
                       pairwise_distance, read_matrix_dump, write_matrix_dump)
from .linkage import (METHODS, MergeTree, agglomerate, cophenetic,
                      naive_linkage_oracle, read_tree_dump, write_tree_dump)
from .tree import (ClusterAssignment, cut_by_count, cut_by_height,
                   read_assignment_json, relabel_by_score, to_newick,
                   write_assignment_json)
from .stats import (ClusterSummary, ExtremalPair, cluster_summary,
                    entity_score, extremal_ratio_report, format_summary_table,
                    write_summary_json)
from .render import LAYOUTS, LayoutSpec, leaf_ordering, render_dendrogram
from .estimator import AgglomerativeSeriesClustering

__version__ = "0.1.0"

__all__ = [
    "AgglomerativeSeriesClustering",
    "ClusterAssignment",
    "ClusterSummary",
    "CovariateMap",
    "DistanceMatrix",
    "ExtremalPair",
    "LAYOUTS",
    "LayoutSpec",
    "METHODS",
    "METRICS",
    "MergeTree",
    "PanelSeries",
    "agglomerate",
    "check_value_range",
    "cluster_summary",
    "cophenetic",
    "cut_by_count",
    "cut_by_height",
    "distance_matrix",
    "entity_score",
    "extremal_ratio_report",
    "format_summary_table",
    "leaf_ordering",
    "load_covariate",
    "load_panel",
    "naive_linkage_oracle",
    "pairwise_distance",
    "read_assignment_json",
    "read_matrix_dump",
    "read_tree_dump",
    "relabel_by_score",
    "render_dendrogram",
    "to_newick",
    "write_assignment_json",
    "write_matrix_dump",
    "write_panel_wide",
    "write_summary_json",
    "write_tree_dump",
]
