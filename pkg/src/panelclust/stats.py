"""Per-cluster summary statistics and covariate comparisons.

Summaries report, for each cluster of an assignment, the member count,
arithmetic mean, standard error (sample standard deviation with the n-1
denominator divided by sqrt of the count), minimum, maximum, and the
max/min extremal ratio. Scores fed to the summary come either from a
covariate map or from a per-entity scalarization of the panel
(``entity_score``: period mean by default, or a single year).
"""
from __future__ import annotations

import json
import math
import textwrap
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_vector, check_option
from .panel import CovariateMap, PanelSeries
from .tree import SCHEMA_VERSION, ClusterAssignment

SCORE_MODES = ("period_mean", "year")


@dataclass
class ClusterSummary:
    cluster_id: int
    member_count: int
    mean: float
    standard_error: float
    minimum: float
    maximum: float
    extremal_ratio: float
    degenerate: bool = False


@dataclass
class ExtremalPair:
    cluster_id: int
    min_entity: str
    min_value: float
    max_entity: str
    max_value: float
    ratio: float


def entity_score(panel: PanelSeries, mode: str = "period_mean", year=None) -> np.ndarray:
    """One scalar per entity: mean over all years, or a single year's column."""
    check_option(mode, SCORE_MODES, "score mode")
    if mode == "period_mean":
        return panel.values.mean(axis=1)
    if year is None:
        raise ValueError("score mode 'year' requires a year")
    return panel.year_column(int(year))


def _aligned_values(values, labels: list[str]) -> np.ndarray:
    """Per-entity values in label order, from a map or an aligned vector."""
    if isinstance(values, (CovariateMap, dict)):
        entries = values.entries if isinstance(values, CovariateMap) else values
        missing = [lab for lab in labels if lab not in entries]
        if missing:
            raise ValueError("no value for entities: " + ", ".join(missing))
        return np.array([float(entries[lab]) for lab in labels], dtype=np.float64)
    arr = as_float_vector(values)
    if arr.shape != (len(labels),):
        raise ValueError(f"need one value per entity, got shape {arr.shape}")
    return arr


def cluster_summary(values, assignment: ClusterAssignment) -> list[ClusterSummary]:
    """Summaries per cluster id. A singleton cluster has SE 0, flagged degenerate.

    The extremal ratio is max/min; it is +inf when the minimum is 0 and is
    only meaningful for strictly positive value scales.
    """
    vals = _aligned_values(values, assignment.labels)
    out = []
    for c in range(assignment.k):
        v = vals[assignment.members_of(c)]
        m = v.shape[0]
        mean = float(v.mean())
        se = 0.0 if m == 1 else float(v.std(ddof=1) / math.sqrt(m))
        vmin = float(v.min())
        vmax = float(v.max())
        ratio = math.inf if vmin == 0 else vmax / vmin
        out.append(ClusterSummary(cluster_id=c, member_count=m, mean=mean,
                                  standard_error=se, minimum=vmin, maximum=vmax,
                                  extremal_ratio=ratio, degenerate=(m == 1)))
    return out


def extremal_ratio_report(values, assignment: ClusterAssignment) -> list[ExtremalPair]:
    """Attaining entities and exact max/min ratio per cluster.

    Requires strictly positive values (ratio scale); ties are resolved to
    the lowest entity index.
    """
    vals = _aligned_values(values, assignment.labels)
    if (vals <= 0).any():
        bad = [assignment.labels[i] for i in np.flatnonzero(vals <= 0)]
        raise ValueError("extremal ratio needs strictly positive values; "
                         "offending entities: " + ", ".join(bad))
    out = []
    for c in range(assignment.k):
        idx = assignment.members_of(c)
        i_min = int(idx[np.argmin(vals[idx])])
        i_max = int(idx[np.argmax(vals[idx])])
        out.append(ExtremalPair(cluster_id=c,
                                min_entity=assignment.labels[i_min],
                                min_value=float(vals[i_min]),
                                max_entity=assignment.labels[i_max],
                                max_value=float(vals[i_max]),
                                ratio=float(vals[i_max] / vals[i_min])))
    return out


def _summary_dicts(summaries: list[ClusterSummary]) -> list[dict]:
    return [{
        "id": s.cluster_id,
        "member_count": s.member_count,
        "mean": s.mean,
        "standard_error": s.standard_error,
        "minimum": s.minimum,
        "maximum": s.maximum,
        "extremal_ratio": s.extremal_ratio if math.isfinite(s.extremal_ratio) else None,
        "degenerate": s.degenerate,
    } for s in summaries]


def write_summary_json(summaries: list[ClusterSummary],
                       covariate: list[ClusterSummary] = None,
                       ratios: list[ExtremalPair] = None) -> str:
    """Full-precision JSON export; non-finite ratios become null.

    ``covariate`` and ``ratios`` add optional sections for summaries of an
    auxiliary per-entity variable and its extremal-pair report.
    """
    doc = {"schema_version": SCHEMA_VERSION, "clusters": _summary_dicts(summaries)}
    if covariate is not None:
        doc["covariate_clusters"] = _summary_dicts(covariate)
    if ratios is not None:
        doc["extremal_ratios"] = [{
            "id": r.cluster_id,
            "min_entity": r.min_entity,
            "min_value": r.min_value,
            "max_entity": r.max_entity,
            "max_value": r.max_value,
            "ratio": r.ratio,
        } for r in ratios]
    return json.dumps(doc, indent=2) + "\n"


def format_summary_table(summaries: list[ClusterSummary],
                         assignment: ClusterAssignment) -> str:
    """Aligned plain-text report: one header per cluster, members alphabetized.

    Headers are 1-based for display; structured outputs keep 0-based ids.
    """
    blocks = []
    for s in summaries:
        ratio = f", max/min {s.extremal_ratio:.2f}" if math.isfinite(s.extremal_ratio) else ""
        head = (f"Cluster #{s.cluster_id + 1} -- average {s.mean:.2f} "
                f"+/- {s.standard_error:.2f} "
                f"(n={s.member_count}, min {s.minimum:.2f}, max {s.maximum:.2f}{ratio})")
        members = ", ".join(sorted(assignment.member_labels(s.cluster_id)))
        body = textwrap.fill(members, width=76, initial_indent="  ",
                             subsequent_indent="  ")
        blocks.append(head + "\n" + body)
    return "\n\n".join(blocks) + "\n"
