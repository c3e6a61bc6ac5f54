"""Page layout graph: horizontal, vertical, and DOM adjacency between text fields.

Two fields are horizontal neighbors when their y-intervals overlap, their
x-intervals are disjoint, and no third field intersects the open strip
between their facing edges (restricted to the shared y-interval). Vertical
neighbors are the same with axes swapped. DOM neighbors are fields whose
absolute element paths have identical tag sequences and index vectors
differing in exactly one position (siblings and cousins).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .snapshot import PageSnapshot


class EdgeType(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    DOM = "dom"


@dataclass(frozen=True)
class LayoutGraph:
    """Undirected typed graph over one page's text fields.

    ``edges`` stores each undirected edge once as (u, v, type) with u < v.
    ``neighbors`` is the untyped union adjacency (a pair is adjacent when
    connected by at least one edge type); it never contains self loops —
    those are added only inside the GNN.
    """

    node_ids: tuple[str, ...]
    edges: frozenset[tuple[str, str, EdgeType]]
    neighbors: dict[str, tuple[str, ...]]

    def has_edge(self, a: str, b: str, edge_type: EdgeType) -> bool:
        u, v = (a, b) if a < b else (b, a)
        return (u, v, edge_type) in self.edges

    def edges_of_type(self, edge_type: EdgeType) -> set[tuple[str, str]]:
        return {(u, v) for u, v, t in self.edges if t is edge_type}


def _interval_arrays(page: PageSnapshot):
    n = len(page.fields)
    x1 = np.empty(n)
    x2 = np.empty(n)
    y1 = np.empty(n)
    y2 = np.empty(n)
    for i, f in enumerate(page.fields):
        x1[i], x2[i] = f.bbox.x, f.bbox.x2
        y1[i], y2[i] = f.bbox.y, f.bbox.y2
    return x1, x2, y1, y2


def _axis_edges(lo_a, hi_a, lo_b, hi_b, ids: list[str]) -> set[tuple[str, str]]:
    """Adjacency along axis a with blockers tested in the open between-strip.

    Axis a is the direction of separation (x for horizontal edges); axis b
    must overlap strictly. Vectorized per candidate pair: the blocker scan
    is a numpy test over all fields.
    """
    n = len(ids)
    if n < 2:
        return set()
    # shared-axis overlap must be strictly positive; separating axis disjoint
    b_overlap = np.minimum.outer(hi_b, hi_b) - np.maximum.outer(lo_b, lo_b) > 0
    a_disjoint = (np.minimum.outer(hi_a, hi_a) - np.maximum.outer(lo_a, lo_a)) <= 0
    candidate = b_overlap & a_disjoint
    np.fill_diagonal(candidate, False)

    edges: set[tuple[str, str]] = set()
    us, vs = np.nonzero(np.triu(candidate, k=1))
    for i, j in zip(us.tolist(), vs.tolist()):
        gap_lo = min(hi_a[i], hi_a[j])
        gap_hi = max(lo_a[i], lo_a[j])
        ov_lo = max(lo_b[i], lo_b[j])
        ov_hi = min(hi_b[i], hi_b[j])
        if gap_hi <= gap_lo:  # touching boxes: empty strip, nothing in between
            edges.add((ids[i], ids[j]) if ids[i] < ids[j] else (ids[j], ids[i]))
            continue
        blocked = (lo_a < gap_hi) & (hi_a > gap_lo) & (lo_b < ov_hi) & (hi_b > ov_lo)
        blocked[i] = blocked[j] = False
        if not blocked.any():
            edges.add((ids[i], ids[j]) if ids[i] < ids[j] else (ids[j], ids[i]))
    return edges


def horizontal_edges(page: PageSnapshot) -> set[tuple[str, str]]:
    """Pairs that are horizontal neighbors (each pair once, id-sorted)."""
    x1, x2, y1, y2 = _interval_arrays(page)
    ids = [f.field_id for f in page.fields]
    return _axis_edges(x1, x2, y1, y2, ids)


def vertical_edges(page: PageSnapshot) -> set[tuple[str, str]]:
    """Pairs that are vertical neighbors (each pair once, id-sorted)."""
    x1, x2, y1, y2 = _interval_arrays(page)
    ids = [f.field_id for f in page.fields]
    return _axis_edges(y1, y2, x1, x2, ids)


def dom_edges(page: PageSnapshot) -> set[tuple[str, str]]:
    """Pairs whose DOM paths differ in exactly one index value.

    Fields are grouped by (tag sequence, index vector with one position
    masked); two members of a group are neighbors iff they differ at the
    masked position, which covers both siblings and cousins.
    """
    edges: set[tuple[str, str]] = set()
    groups: dict[tuple, list[tuple[str, int]]] = {}
    for f in page.fields:
        tags = tuple(tag for tag, _ in f.dom_path)
        indices = tuple(idx for _, idx in f.dom_path)
        for pos in range(len(indices)):
            key = (tags, pos, indices[:pos], indices[pos + 1:])
            groups.setdefault(key, []).append((f.field_id, indices[pos]))
    for members in groups.values():
        if len(members) < 2:
            continue
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                (id_a, idx_a), (id_b, idx_b) = members[i], members[j]
                if idx_a != idx_b:
                    edges.add((id_a, id_b) if id_a < id_b else (id_b, id_a))
    return edges


def build_layout_graph(page: PageSnapshot) -> LayoutGraph:
    """Union of the three edge sets with a per-node neighbor index.

    Node order and all outputs are deterministic (sorted by field_id) and
    independent of the input field ordering.
    """
    typed: set[tuple[str, str, EdgeType]] = set()
    for pair in horizontal_edges(page):
        typed.add((*pair, EdgeType.HORIZONTAL))
    for pair in vertical_edges(page):
        typed.add((*pair, EdgeType.VERTICAL))
    for pair in dom_edges(page):
        typed.add((*pair, EdgeType.DOM))

    node_ids = tuple(sorted(f.field_id for f in page.fields))
    adjacency: dict[str, set[str]] = {node: set() for node in node_ids}
    for u, v, _ in typed:
        adjacency[u].add(v)
        adjacency[v].add(u)
    neighbors = {node: tuple(sorted(adjacency[node])) for node in node_ids}
    return LayoutGraph(node_ids=node_ids, edges=frozenset(typed), neighbors=neighbors)


def filter_edges(graph: LayoutGraph, keep: set[EdgeType]) -> LayoutGraph:
    """The same graph with only the kept edge types (for edge ablations)."""
    typed = {(u, v, t) for u, v, t in graph.edges if t in keep}
    adjacency: dict[str, set[str]] = {node: set() for node in graph.node_ids}
    for u, v, _ in typed:
        adjacency[u].add(v)
        adjacency[v].add(u)
    neighbors = {node: tuple(sorted(adjacency[node])) for node in graph.node_ids}
    return LayoutGraph(node_ids=graph.node_ids, edges=frozenset(typed), neighbors=neighbors)


def export_edge_list(graph: LayoutGraph) -> str:
    """Debug export: one ``field_id<TAB>field_id<TAB>type`` line per edge."""
    lines = [f"{u}\t{v}\t{t.value}" for u, v, t in sorted(graph.edges, key=lambda e: (e[0], e[1], e[2].value))]
    return "\n".join(lines) + ("\n" if lines else "")
