"""Graph value types."""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import sparse

from netdomain.core.enums import ProjectionSide


@dataclass(frozen=True)
class RawGraph:
    """
    Edges exactly as read: duplicates, self-loops and both directions kept.
    Internal ids are contiguous from 0; node_labels[i] is the original label of id i.
    """
    edges: Tuple[Tuple[int, int], ...]
    node_labels: Tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.node_labels)


@dataclass(frozen=True, eq=True)
class Graph:
    """
    Simple undirected unweighted graph.

    adjacency[v] is the sorted tuple of neighbours of v; labels[v] is the
    original label of v. Immutable, safe to share between workers.
    """
    n: int
    adjacency: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...]

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Sequence[Tuple[int, int]],
        labels: Optional[Sequence[str]] = None,
    ) -> "Graph":
        """Build a simple graph; loops are dropped and both directions merged."""
        neighbours: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            neighbours[u].add(v)
            neighbours[v].add(u)
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise ValueError(f"Expected {n} labels, got {len(labels)}")
        return cls(
            n=n,
            adjacency=tuple(tuple(sorted(s)) for s in neighbours),
            labels=tuple(labels),
        )

    @cached_property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)

    @cached_property
    def neighbour_sets(self) -> Tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (w for a in self.adjacency for w in a), dtype=np.int64, count=int(indptr[-1])
        )
        data = np.ones(indices.shape[0], dtype=np.float64)
        return sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v, in sorted order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def relabel(self, order: Sequence[int]) -> "Graph":
        """Graph with node order[i] renamed to i (labels travel with nodes)."""
        position = {old: new for new, old in enumerate(order)}
        edges = [(position[u], position[v]) for u, v in self.edges()]
        return Graph.from_edges(self.n, edges, [self.labels[old] for old in order])


@dataclass(frozen=True)
class BipartitePartition:
    """side_of[v] is LEFT or RIGHT; no edge joins two nodes of the same side."""
    side_of: Tuple[ProjectionSide, ...]

    def members(self, side: ProjectionSide) -> List[int]:
        return [v for v, s in enumerate(self.side_of) if s == side]


class CanonicalizationRecord(BaseModel):
    """Provenance of one network's preprocessing."""
    network_id: str
    raw_nodes: int
    raw_edge_lines: int
    self_loops_removed: int
    duplicates_removed: int
    nodes: int
    edges: int
    components: int
    bipartite: bool
    projected_onto: Optional[ProjectionSide] = None
    notes: List[str] = []


class IngestSummary(BaseModel):
    networks: Dict[str, CanonicalizationRecord]
