"""Command-line front-end for the clustering pipeline.

Subcommands cover the full chain and each stage separately:

* cluster   -- panel -> distances -> tree -> cut -> stats/figure, any outputs
* distances -- panel -> distance matrix dump
* tree      -- panel -> merge tree dump and/or Newick
* cut       -- panel + tree dump -> assignment JSON
* stats     -- panel + assignment JSON -> summary JSON and a text table
* render    -- panel + tree dump (+ assignment) -> SVG figure

Outputs are written only after the whole computation succeeds, and a
failure while writing removes everything already written: a non-zero exit
never leaves partial artifacts behind. All behavior is flag-driven (no
environment variables) and deterministic: identical inputs give
byte-identical outputs.
"""
from __future__ import annotations

import argparse
import os
import sys

from .distance import METRICS, distance_matrix, write_matrix_dump
from .linkage import _ALL_METHODS, agglomerate, read_tree_dump, write_tree_dump
from .panel import DELIMITERS, check_value_range, load_covariate, load_panel
from .render import LAYOUTS, LayoutSpec, render_dendrogram
from .stats import (cluster_summary, entity_score, extremal_ratio_report,
                    format_summary_table, write_summary_json)
from .tree import (cut_by_count, cut_by_height, read_assignment_json,
                   relabel_by_score, to_newick, write_assignment_json)


class PipelineError(Exception):
    """Error tagged with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(str(cause))
        self.stage = stage


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc)


def _range_bounds(text: str):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")


def _panel_args(p):
    p.add_argument("--input", required=True, help="panel CSV path")
    p.add_argument("--format", choices=("wide", "long"), default="wide",
                   help="panel layout (default wide)")
    p.add_argument("--delimiter", choices=tuple(DELIMITERS), default="comma")
    p.add_argument("--filter-incomplete", action="store_true",
                   help="drop entities with missing years instead of failing")
    p.add_argument("--expect-range", type=_range_bounds, metavar="LO:HI",
                   help="fail unless all panel values lie in [LO, HI]")


def _distance_args(p):
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the distance stage")


def _cut_args(p):
    p.add_argument("--cut-k", type=int, help="cut the tree into this many clusters")
    p.add_argument("--cut-height", type=float, help="cut the tree at this height")


def _load_panel_stage(args):
    def go():
        pm = load_panel(args.input, layout=args.format,
                        filter_incomplete=args.filter_incomplete,
                        delimiter=DELIMITERS[args.delimiter])
        if args.expect_range is not None:
            check_value_range(pm, *args.expect_range)
        return pm
    return _stage("ingest", go)


def _resolve_cut(args, reproduce: bool):
    k, h = args.cut_k, args.cut_height
    if reproduce and k is None and h is None:
        k = 4
    if k is not None and h is not None:
        raise PipelineError("cut", ValueError("pass --cut-k or --cut-height, not both"))
    return k, h


def _cut_stage(tree, labels, k, h):
    if k is not None:
        return _stage("cut", cut_by_count, tree, labels, k)
    return _stage("cut", cut_by_height, tree, labels, h)


def _write_all(outputs):
    """Write (path, text) pairs; on any failure remove everything written."""
    written = []
    try:
        for path, text in outputs:
            written.append(path)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except Exception:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise


def _emit(outputs, report):
    _stage("write", _write_all, outputs)
    for line in report:
        print(line)
    for path, _ in outputs:
        print(f"wrote {path}")
    return 0


def cmd_cluster(args) -> int:
    reproduce = args.reproduce_paper
    metric = args.metric
    method = args.method
    pm = _load_panel_stage(args)
    dm = _stage("distance", distance_matrix, pm, metric=metric, threads=args.threads)
    tr = _stage("linkage", agglomerate, dm, method=method)

    k, h = _resolve_cut(args, reproduce)
    cutting = k is not None or h is not None
    needs_cut = args.assignment or args.summary
    if needs_cut and not cutting:
        raise PipelineError("cut", ValueError(
            "--assignment/--summary need a cut; pass --cut-k or --cut-height"))

    assignment = _cut_stage(tr, pm.entities, k, h) if cutting else None
    report = [f"entities={pm.n} years={pm.n_years} metric={metric} method={method}"]

    scores = None
    if cutting:
        mode = "year" if args.score_year is not None else "period_mean"
        scores = _stage("stats", entity_score, pm, mode, args.score_year)
        if reproduce:
            # Report ordering: cluster 0 gets the highest mean score.
            assignment = _stage("stats", relabel_by_score, assignment, scores)
        report.append(f"cut k={assignment.k}")

    outputs = []
    if args.tree:
        outputs.append((args.tree, write_tree_dump(tr)))
    if args.newick:
        outputs.append((args.newick, to_newick(tr, pm.entities, quote=True) + "\n"))
    if args.assignment:
        outputs.append((args.assignment, write_assignment_json(assignment)))
    if args.summary:
        summaries = _stage("stats", cluster_summary, scores, assignment)
        cov_sum = ratios = None
        if args.covariate:
            cov = _stage("ingest", load_covariate, args.covariate,
                         delimiter=DELIMITERS[args.delimiter])
            cov_sum = _stage("stats", cluster_summary, cov, assignment)
            ratios = _stage("stats", extremal_ratio_report, cov, assignment)
        outputs.append((args.summary,
                        write_summary_json(summaries, covariate=cov_sum, ratios=ratios)))
    if args.figure:
        spec = LayoutSpec(layout=args.layout)
        outputs.append((args.figure, _stage(
            "render", render_dendrogram, tr, pm.entities, assignment, spec)))
    return _emit(outputs, report)


def cmd_distances(args) -> int:
    pm = _load_panel_stage(args)
    dm = _stage("distance", distance_matrix, pm, metric=args.metric,
                threads=args.threads)
    report = [f"entities={pm.n} years={pm.n_years} metric={args.metric}"]
    return _emit([(args.matrix, write_matrix_dump(dm))], report)


def cmd_tree(args) -> int:
    if not (args.tree or args.newick):
        raise PipelineError("write", ValueError("pass --tree and/or --newick"))
    pm = _load_panel_stage(args)
    dm = _stage("distance", distance_matrix, pm, metric=args.metric,
                threads=args.threads)
    tr = _stage("linkage", agglomerate, dm, method=args.method)
    outputs = []
    if args.tree:
        outputs.append((args.tree, write_tree_dump(tr)))
    if args.newick:
        outputs.append((args.newick, to_newick(tr, pm.entities, quote=True) + "\n"))
    report = [f"entities={pm.n} metric={args.metric} method={args.method}"]
    return _emit(outputs, report)


def _read_tree_stage(path, n):
    def go():
        with open(path, encoding="utf-8") as fh:
            tr = read_tree_dump(fh.read())
        if tr.n != n:
            raise ValueError(f"tree covers {tr.n} leaves but the panel has {n}")
        return tr
    return _stage("linkage", go)


def cmd_cut(args) -> int:
    pm = _load_panel_stage(args)
    tr = _read_tree_stage(args.tree, pm.n)
    k, h = args.cut_k, args.cut_height
    if (k is None) == (h is None):
        raise PipelineError("cut", ValueError(
            "pass exactly one of --cut-k and --cut-height"))
    assignment = _cut_stage(tr, pm.entities, k, h)
    return _emit([(args.assignment, write_assignment_json(assignment))],
                 [f"cut k={assignment.k}"])


def cmd_stats(args) -> int:
    pm = _load_panel_stage(args)
    def read_assignment():
        with open(args.assignment, encoding="utf-8") as fh:
            return read_assignment_json(fh.read(), pm.entities)
    assignment = _stage("cut", read_assignment)
    mode = "year" if args.score_year is not None else "period_mean"
    scores = _stage("stats", entity_score, pm, mode, args.score_year)
    summaries = _stage("stats", cluster_summary, scores, assignment)
    cov_sum = ratios = None
    if args.covariate:
        cov = _stage("ingest", load_covariate, args.covariate,
                     delimiter=DELIMITERS[args.delimiter])
        cov_sum = _stage("stats", cluster_summary, cov, assignment)
        ratios = _stage("stats", extremal_ratio_report, cov, assignment)
    outputs = []
    if args.summary:
        outputs.append((args.summary,
                        write_summary_json(summaries, covariate=cov_sum, ratios=ratios)))
    _stage("write", _write_all, outputs)
    print(format_summary_table(summaries, assignment), end="")
    if ratios is not None:
        for r in ratios:
            print(f"cluster #{r.cluster_id + 1} covariate extremes: "
                  f"min {r.min_entity} ({r.min_value:.2f}), "
                  f"max {r.max_entity} ({r.max_value:.2f}), "
                  f"ratio {r.ratio:.2f}")
    for path, _ in outputs:
        print(f"wrote {path}")
    return 0


def cmd_render(args) -> int:
    pm = _load_panel_stage(args)
    tr = _read_tree_stage(args.tree, pm.n)
    assignment = None
    if args.assignment:
        def read_assignment():
            with open(args.assignment, encoding="utf-8") as fh:
                return read_assignment_json(fh.read(), pm.entities)
        assignment = _stage("cut", read_assignment)
    spec = LayoutSpec(layout=args.layout)
    doc = _stage("render", render_dendrogram, tr, pm.entities, assignment, spec)
    return _emit([(args.figure, doc)], [f"layout={args.layout}"])


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="panelclust",
        description="Agglomerative clustering of panel time series")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="full pipeline: ingest to outputs")
    _panel_args(p)
    _distance_args(p)
    p.add_argument("--method", choices=_ALL_METHODS, default="average")
    _cut_args(p)
    p.add_argument("--score-year", type=int,
                   help="score entities by this year's value instead of the period mean")
    p.add_argument("--covariate", help="entity,value CSV for covariate summaries")
    p.add_argument("--tree", help="write the merge tree dump here")
    p.add_argument("--newick", help="write the Newick tree here")
    p.add_argument("--assignment", help="write the cluster assignment JSON here")
    p.add_argument("--summary", help="write the cluster summary JSON here")
    p.add_argument("--figure", help="write the dendrogram SVG here")
    p.add_argument("--layout", choices=LAYOUTS, default="rectangular")
    p.add_argument("--reproduce-paper", action="store_true",
                   help="preset: euclidean distance, average linkage, k=4 cut, "
                        "period-mean scores, clusters numbered by descending mean")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("distances", help="write the pairwise distance dump")
    _panel_args(p)
    _distance_args(p)
    p.add_argument("--matrix", required=True, help="output path for the dump")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("tree", help="cluster and write the merge tree")
    _panel_args(p)
    _distance_args(p)
    p.add_argument("--method", choices=_ALL_METHODS, default="average")
    p.add_argument("--tree", help="write the merge tree dump here")
    p.add_argument("--newick", help="write the Newick tree here")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("cut", help="cut a saved tree into clusters")
    _panel_args(p)
    p.add_argument("--tree", required=True, help="merge tree dump to cut")
    _cut_args(p)
    p.add_argument("--assignment", required=True, help="output assignment JSON")
    p.set_defaults(func=cmd_cut)

    p = sub.add_parser("stats", help="summarize clusters from a saved assignment")
    _panel_args(p)
    p.add_argument("--assignment", required=True, help="assignment JSON to summarize")
    p.add_argument("--score-year", type=int,
                   help="score entities by this year's value instead of the period mean")
    p.add_argument("--covariate", help="entity,value CSV for covariate summaries")
    p.add_argument("--summary", help="write the summary JSON here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", help="draw a saved tree as SVG")
    _panel_args(p)
    p.add_argument("--tree", required=True, help="merge tree dump to draw")
    p.add_argument("--assignment", help="assignment JSON for cluster separators")
    p.add_argument("--layout", choices=LAYOUTS, default="rectangular")
    p.add_argument("--figure", required=True, help="output SVG path")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error in {exc.stage} stage: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error in write stage: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
