"""Dendrogram drawings as self-contained SVG documents.

Two layouts. Rectangular puts leaves at uniform spacing along the bottom
edge and draws each merge as two vertical risers joined by a horizontal
bridge at a y proportional to merge height. Radial puts leaf i at angle
exactly 2*pi*i/n on an outer ring, with the radius of a node proportional
to (root height - node height): the root sits at the centre and branches
grow outward. An optional cluster assignment adds dashed separator lines
between adjacent leaves of different clusters (at the midpoint between
them): k-1 vertical lines in rectangular layout, k radial lines in radial
layout since the ring closes on itself.

All coordinates are emitted with fixed 3-decimal precision; rendering the
same tree twice yields byte-identical documents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from ._validation import check_labels, check_option
from .linkage import MergeTree
from .tree import ClusterAssignment

LAYOUTS = ("rectangular", "radial")

_EDGE_STYLE = 'stroke="#333333" stroke-width="1" fill="none"'
_SEP_STYLE = 'stroke="#666666" stroke-width="1" stroke-dasharray="4 3"'


@dataclass
class LayoutSpec:
    """Canvas geometry and label styling for render_dendrogram."""

    layout: str = "rectangular"
    width: float = 900.0
    height: float = 600.0
    font_size: float = 10.0
    show_labels: bool = True

    def __post_init__(self):
        check_option(self.layout, LAYOUTS, "layout")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("canvas dimensions must be positive")


def leaf_ordering(tree: MergeTree) -> list[int]:
    """Leaves in drawing order.

    Recursive left-to-right traversal, visiting at each merge the child
    containing the lowest leaf index first. Every cluster of every
    horizontal cut occupies a contiguous run of this order. Implemented
    with an explicit stack; deep chain trees must not hit the interpreter
    recursion limit.
    """
    n = tree.n
    min_leaf = tree.min_leaf()
    order: list[int] = []
    stack = [2 * n - 2]
    while stack:
        node = stack.pop()
        if node < n:
            order.append(node)
            continue
        k = node - n
        first, second = int(tree.lefts[k]), int(tree.rights[k])
        if min_leaf[first] > min_leaf[second]:
            first, second = second, first
        stack.append(second)
        stack.append(first)
    return order


def _boundaries(order: list[int], assignment: ClusterAssignment) -> list[int]:
    """Positions p where order[p] and order[p+1] belong to different clusters.

    A valid cut of the rendered tree gives every cluster a contiguous run,
    hence exactly k-1 boundaries; anything else is an inconsistent
    assignment.
    """
    ids = assignment.cluster_of[np.array(order)]
    cuts = [p for p in range(len(order) - 1) if ids[p] != ids[p + 1]]
    if len(cuts) != assignment.k - 1:
        raise ValueError("assignment clusters are not contiguous in this tree's "
                         "leaf order; separators need a cut of the same tree")
    return cuts


def _line(x1, y1, x2, y2) -> str:
    return (f'<line x1="{x1:.3f}" y1="{y1:.3f}" '
            f'x2="{x2:.3f}" y2="{y2:.3f}"/>')


def _node_heights(tree: MergeTree) -> np.ndarray:
    hs = np.zeros(2 * tree.n - 1, dtype=np.float64)
    hs[tree.n:] = tree.heights
    return hs


def _render_rectangular(tree, labels, assignment, spec) -> list[str]:
    n = tree.n
    margin = 20.0
    label_space = (4.0 + 7.2 * max(len(lab) for lab in labels)) if spec.show_labels else 0.0
    plot_w = spec.width - 2 * margin
    plot_h = spec.height - 2 * margin - label_space
    denom = tree.root_height or 1.0

    order = leaf_ordering(tree)
    xs = np.empty(2 * n - 1, dtype=np.float64)
    for pos, leaf in enumerate(order):
        xs[leaf] = margin + (pos + 0.5) * plot_w / n
    base_y = margin + plot_h
    ys = base_y - _node_heights(tree) / denom * plot_h

    edges = []
    for k in range(n - 1):
        left, right = int(tree.lefts[k]), int(tree.rights[k])
        xs[n + k] = (xs[left] + xs[right]) / 2.0
        ym = ys[n + k]
        edges.append(_line(xs[left], ys[left], xs[left], ym))
        edges.append(_line(xs[right], ys[right], xs[right], ym))
        edges.append(_line(min(xs[left], xs[right]), ym,
                           max(xs[left], xs[right]), ym))
    parts = [f'<g {_EDGE_STYLE}>'] + edges + ["</g>"]

    if assignment is not None:
        seps = []
        for p in _boundaries(order, assignment):
            x = (xs[order[p]] + xs[order[p + 1]]) / 2.0
            seps.append(_line(x, margin, x, base_y))
        parts += [f'<g {_SEP_STYLE}>'] + seps + ["</g>"]

    if spec.show_labels:
        texts = []
        for pos, leaf in enumerate(order):
            x, y = xs[leaf], base_y + 6.0
            texts.append(f'<text x="{x:.3f}" y="{y:.3f}" '
                         f'transform="rotate(90 {x:.3f} {y:.3f})">'
                         f'{escape(labels[leaf])}</text>')
        parts += [f'<g font-family="sans-serif" font-size="{spec.font_size:g}" '
                  f'text-anchor="start">'] + texts + ["</g>"]
    return parts


def _render_radial(tree, labels, assignment, spec) -> list[str]:
    n = tree.n
    cx, cy = spec.width / 2.0, spec.height / 2.0
    label_space = (8.0 + 7.2 * max(len(lab) for lab in labels)) if spec.show_labels else 8.0
    R = min(cx, cy) - label_space
    if R <= 0:
        raise ValueError("canvas too small for the label margin")
    denom = tree.root_height or 1.0

    order = leaf_ordering(tree)
    angles = np.empty(2 * n - 1, dtype=np.float64)
    for pos, leaf in enumerate(order):
        angles[leaf] = 2.0 * math.pi * pos / n
    radii = R * (tree.root_height - _node_heights(tree)) / denom

    def point(node):
        a = angles[node]
        r = radii[node]
        return cx + r * math.cos(a), cy + r * math.sin(a)

    edges = []
    for k in range(n - 1):
        left, right = int(tree.lefts[k]), int(tree.rights[k])
        rp = radii[n + k]
        angles[n + k] = (angles[left] + angles[right]) / 2.0
        for child in (left, right):
            a = angles[child]
            x1, y1 = point(child)
            edges.append(_line(x1, y1, cx + rp * math.cos(a), cy + rp * math.sin(a)))
        a1, a2 = sorted((angles[left], angles[right]))
        large = 1 if a2 - a1 > math.pi else 0
        sx, sy = cx + rp * math.cos(a1), cy + rp * math.sin(a1)
        ex, ey = cx + rp * math.cos(a2), cy + rp * math.sin(a2)
        # Sweep flag 1: increasing angle, clockwise on screen (y grows down).
        edges.append(f'<path d="M {sx:.3f} {sy:.3f} '
                     f'A {rp:.3f} {rp:.3f} 0 {large} 1 {ex:.3f} {ey:.3f}"/>')
    parts = [f'<g {_EDGE_STYLE}>'] + edges + ["</g>"]

    if assignment is not None:
        cuts = _boundaries(order, assignment)
        mids = [(angles[order[p]] + angles[order[p + 1]]) / 2.0 for p in cuts]
        if assignment.k > 1:
            # The ring closes: the run before leaf 0 also ends a cluster.
            mids.append((angles[order[-1]] + 2.0 * math.pi) / 2.0)
        seps = []
        for a in mids:
            r_out = R + 4.0
            seps.append(_line(cx, cy, cx + r_out * math.cos(a), cy + r_out * math.sin(a)))
        parts += [f'<g {_SEP_STYLE}>'] + seps + ["</g>"]

    if spec.show_labels:
        texts = []
        for pos, leaf in enumerate(order):
            a = angles[leaf]
            deg = math.degrees(a)
            anchor = "start"
            if 90.0 < deg <= 270.0:
                # Left half-circle: flip so text is not upside down.
                deg -= 180.0
                anchor = "end"
            r_lab = R + 6.0
            x, y = cx + r_lab * math.cos(a), cy + r_lab * math.sin(a)
            texts.append(f'<text x="{x:.3f}" y="{y:.3f}" text-anchor="{anchor}" '
                         f'transform="rotate({deg:.3f} {x:.3f} {y:.3f})">'
                         f'{escape(labels[leaf])}</text>')
        parts += [f'<g font-family="sans-serif" '
                  f'font-size="{spec.font_size:g}">'] + texts + ["</g>"]
    return parts


def render_dendrogram(tree: MergeTree, labels, assignment: ClusterAssignment = None,
                      spec: LayoutSpec = None) -> str:
    """Emit a dendrogram drawing as a complete SVG document."""
    labels = check_labels(labels)
    if len(labels) != tree.n:
        raise ValueError(f"{len(labels)} labels for a tree over {tree.n} leaves")
    if spec is None:
        spec = LayoutSpec()
    if assignment is not None and assignment.n != tree.n:
        raise ValueError("assignment covers a different entity count than the tree")

    if spec.layout == "rectangular":
        body = _render_rectangular(tree, labels, assignment, spec)
    else:
        body = _render_radial(tree, labels, assignment, spec)

    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{spec.width:g}" height="{spec.height:g}" '
            f'viewBox="0 0 {spec.width:g} {spec.height:g}">')
    return "\n".join([head] + body + ["</svg>"]) + "\n"
