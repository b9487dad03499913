"""
Graph preprocessing service.
Parses raw edge lists and canonicalizes them into simple, undirected,
unweighted, connected graphs, projecting bipartite inputs onto one side.
"""
import logging
from collections import deque
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from netdomain.core.enums import ProjectionSide
from netdomain.core.exceptions import GraphError, GraphParseError
from netdomain.schemas import BipartitePartition, CanonicalizationRecord, Graph, RawGraph
from netdomain.utils.io import atomic_write_text

logger = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


def parse_edge_list(text: Union[str, Iterable[str]]) -> RawGraph:
    """
    Parse whitespace-separated edge-list text.

    Lines starting with '#' or '%' are comments; tokens after the second
    (weights, timestamps) are ignored. Duplicates, self-loops and both
    directions are preserved for simplify().

    Args:
        text: whole text or an iterable of lines

    Returns:
        RawGraph with ids assigned in order of first appearance
    """
    lines = text.splitlines() if isinstance(text, str) else text
    ids: Dict[str, int] = {}
    labels: List[str] = []
    edges: List[Tuple[int, int]] = []

    def node_id(label: str) -> int:
        if label not in ids:
            ids[label] = len(labels)
            labels.append(label)
        return ids[label]

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphParseError(f"expected at least 2 tokens, got {len(tokens)}", line=line_no)
        edges.append((node_id(tokens[0]), node_id(tokens[1])))

    if not edges:
        raise GraphParseError("empty input: no edges found")

    return RawGraph(edges=tuple(edges), node_labels=tuple(labels))


def read_edge_list(path: Union[str, Path]) -> RawGraph:
    """Parse an edge-list file."""
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        try:
            return parse_edge_list(f)
        except GraphParseError as e:
            raise GraphParseError(f"{path}: {e}") from e


def simplify(raw: RawGraph) -> Graph:
    """Drop self-loops and parallel edges, forget directions; keeps every node."""
    return Graph.from_edges(raw.n, raw.edges, raw.node_labels)


def _label_key(label: str) -> Tuple[int, int, str]:
    # integer labels compare numerically and sort before other labels
    try:
        return 0, int(label), ""
    except ValueError:
        return 1, 0, label


def connected_components(g: Graph) -> List[List[int]]:
    """Components as sorted node lists, in order of their smallest node id."""
    if g.n == 0:
        return []
    _, labels = csgraph.connected_components(g.csr, directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    components = [sorted(int(v) for v in part) for part in np.split(order, splits)]
    return sorted(components, key=lambda c: c[0])


def induced_subgraph(g: Graph, nodes: List[int]) -> Graph:
    """Subgraph on `nodes`, re-indexed 0..k-1 in ascending original id order."""
    nodes = sorted(nodes)
    position = {v: i for i, v in enumerate(nodes)}
    edges = [
        (position[u], position[w])
        for u in nodes
        for w in g.adjacency[u]
        if w in position and u < w
    ]
    return Graph.from_edges(len(nodes), edges, [g.labels[v] for v in nodes])


def giant_component(g: Graph) -> Graph:
    """
    Largest connected component, re-indexed contiguously.

    Ties between equally large components go to the one containing the
    smallest original label.
    """
    if g.n == 0:
        raise GraphError("Cannot take the giant component of an empty graph")

    components = connected_components(g)
    if len(components) == 1:
        return g

    best = max(len(c) for c in components)
    tied = [c for c in components if len(c) == best]
    chosen = min(tied, key=lambda c: min(_label_key(g.labels[v]) for v in c))
    if len(tied) > 1:
        logger.debug(f"{len(tied)} components tie at size {best}; keeping the one with smallest label")
    return induced_subgraph(g, chosen)


def detect_bipartite(g: Graph) -> Optional[BipartitePartition]:
    """BFS 2-colouring; each component's lowest id is LEFT. None when an odd cycle exists."""
    side: List[Optional[ProjectionSide]] = [None] * g.n
    for start in range(g.n):
        if side[start] is not None:
            continue
        side[start] = ProjectionSide.LEFT
        queue = deque([start])
        while queue:
            v = queue.popleft()
            other = ProjectionSide.RIGHT if side[v] == ProjectionSide.LEFT else ProjectionSide.LEFT
            for w in g.adjacency[v]:
                if side[w] is None:
                    side[w] = other
                    queue.append(w)
                elif side[w] == side[v]:
                    return None
    return BipartitePartition(side_of=tuple(side))


def resolve_side(partition: BipartitePartition, side: ProjectionSide) -> ProjectionSide:
    """Map LARGER/SMALLER onto LEFT/RIGHT; equal sizes resolve to LEFT."""
    if side in (ProjectionSide.LEFT, ProjectionSide.RIGHT):
        return side
    n_left = len(partition.members(ProjectionSide.LEFT))
    n_right = len(partition.members(ProjectionSide.RIGHT))
    if n_left == n_right:
        return ProjectionSide.LEFT
    if side == ProjectionSide.LARGER:
        return ProjectionSide.LEFT if n_left > n_right else ProjectionSide.RIGHT
    return ProjectionSide.LEFT if n_left < n_right else ProjectionSide.RIGHT


def project_bipartite(g: Graph, partition: BipartitePartition, side: ProjectionSide) -> Graph:
    """
    One-mode projection onto `side`.

    Two kept nodes are linked iff they share at least one neighbour on the
    other side. Kept nodes are re-indexed in ascending original id order.
    """
    if len(partition.side_of) != g.n:
        raise GraphError("Partition does not cover the graph")
    chosen = resolve_side(partition, side)
    kept = partition.members(chosen)
    if not kept:
        raise GraphError(f"Projection side {side.value} is empty")
    others = [v for v in range(g.n) if partition.side_of[v] != chosen]

    edges = []
    if others:
        incidence = g.csr[kept][:, others]
        shared = sparse.triu(incidence @ incidence.T, k=1).tocoo()
        edges = sorted(zip(shared.row.tolist(), shared.col.tolist()))
    return Graph.from_edges(len(kept), edges, [g.labels[v] for v in kept])


def canonicalize(
    raw: RawGraph,
    network_id: str,
    project_onto: Optional[ProjectionSide] = None,
    auto_project: bool = False,
) -> Tuple[Graph, CanonicalizationRecord]:
    """
    simplify -> giant component -> (projection -> giant component).

    Projection runs when the manifest names a side, or when auto_project is
    set and the graph turns out bipartite (side LARGER).
    """
    loops = sum(1 for u, v in raw.edges if u == v)
    simple = simplify(raw)
    n_components = len(connected_components(simple))
    graph = giant_component(simple)
    notes: List[str] = []

    partition = detect_bipartite(graph)
    side = project_onto
    if side is None and auto_project and partition is not None and graph.n > 1:
        side = ProjectionSide.LARGER
        notes.append("auto-projected")

    projected = None
    if side is not None:
        if partition is None:
            msg = "declared bipartite but not 2-colourable; kept unprojected"
            logger.warning(f"Network {network_id}: {msg}")
            notes.append(msg)
        else:
            projected = resolve_side(partition, side)
            graph = giant_component(project_bipartite(graph, partition, side))

    record = CanonicalizationRecord(
        network_id=network_id,
        raw_nodes=raw.n,
        raw_edge_lines=len(raw.edges),
        self_loops_removed=loops,
        duplicates_removed=len(raw.edges) - loops - simple.edge_count,
        nodes=graph.n,
        edges=graph.edge_count,
        components=n_components,
        bipartite=partition is not None,
        projected_onto=projected,
        notes=notes,
    )
    return graph, record


def write_graph(edges_path: Union[str, Path], labels_path: Union[str, Path], g: Graph) -> None:
    """Persist a canonical graph as an internal-id edge list plus one label per line."""
    atomic_write_text(edges_path, "".join(f"{u} {v}\n" for u, v in g.edges()))
    atomic_write_text(labels_path, "".join(f"{label}\n" for label in g.labels))


def read_graph(edges_path: Union[str, Path], labels_path: Union[str, Path]) -> Graph:
    """Load a graph written by write_graph."""
    with open(labels_path, "r", encoding="utf-8") as f:
        labels = [line.rstrip("\n") for line in f]
    edges = []
    with open(edges_path, "r", encoding="utf-8") as f:
        for line in f:
            u, v = line.split()
            edges.append((int(u), int(v)))
    return Graph.from_edges(len(labels), edges, labels)
