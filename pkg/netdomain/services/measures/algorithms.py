"""
Topological measure implementations.

Every measure has the signature fn(g, guard, ctx) and returns a float
(scalar measures) or a 1-D float array (distributions, node order or
g.edges() order). Budget overruns raise BudgetExceeded, graphs on which a
measure has no value raise UndefinedMeasure; the engine turns both into
missing results.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Set, Tuple

import numpy as np
from numba import njit
from scipy import sparse
from scipy.sparse import csgraph

from netdomain.core.constants import (
    DISTANCE_CHUNK, ITERATION_CAP, ITERATION_TOLERANCE, PAGERANK_DAMPING,
)
from netdomain.core.enums import MissingReason
from netdomain.core.exceptions import BudgetExceeded, UndefinedMeasure
from netdomain.schemas import Budget, Graph, SamplingConfig
from netdomain.utils.seeding import rng_for

logger = logging.getLogger(__name__)

FLOAT_BYTES = 8


class BudgetGuard:
    """
    Cooperative budget enforcement.

    Algorithms call check() at loop granularity and reserve() before large
    allocations. A zero wall-time budget fails the very first check.
    """

    def __init__(self, budget: Budget):
        self.budget = budget
        self.deadline = time.monotonic() + budget.wall_time
        self.memory_left = budget.memory

    def check(self) -> None:
        if time.monotonic() >= self.deadline:
            raise BudgetExceeded(MissingReason.TIMEOUT, f"exceeded {self.budget.wall_time}s")

    def reserve(self, nbytes: int, what: str = "") -> None:
        if nbytes > self.memory_left:
            raise BudgetExceeded(
                MissingReason.MEMORY, f"{what} needs {nbytes} bytes, {self.memory_left} left"
            )
        self.memory_left -= nbytes

    def release(self, nbytes: int) -> None:
        self.memory_left = min(self.budget.memory, self.memory_left + nbytes)


@dataclass
class MeasureContext:
    """Per-run parameters shared by the seeded (sampled) measures."""
    seed: int
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    sampled: bool = False

    def sources(self, g: Graph) -> np.ndarray:
        """All nodes up to the exact-size threshold, a seeded sorted sample above it."""
        if g.n <= self.sampling.exact_max_nodes:
            return np.arange(g.n, dtype=np.int64)
        k = min(self.sampling.sample_sources, g.n)
        self.sampled = True
        # shared by all path measures of this graph so their estimates agree
        rng = rng_for(self.seed, "sources", g.n, g.edge_count)
        return np.sort(rng.choice(g.n, size=k, replace=False)).astype(np.int64)


# ---------------------------------------------------------------------------
# Size and degree
# ---------------------------------------------------------------------------

def node_count(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(g.n)


def edge_count(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(g.edge_count)


def density(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    if g.n < 2:
        raise UndefinedMeasure("density needs at least 2 nodes")
    return 2.0 * g.edge_count / (g.n * (g.n - 1))


def degree(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    return g.degrees.astype(np.float64)


def average_neighbor_degree(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    totals = g.csr @ deg
    out = np.zeros(g.n, dtype=np.float64)
    np.divide(totals, deg, out=out, where=deg > 0)
    return out


def degree_assortativity(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    """Pearson correlation of the degrees at both ends of every edge (each edge both ways)."""
    if g.edge_count == 0:
        raise UndefinedMeasure("no edges")
    deg = g.degrees.astype(np.float64)
    us, vs = np.array(list(g.edges()), dtype=np.int64).T
    x = np.concatenate([deg[us], deg[vs]])
    y = np.concatenate([deg[vs], deg[us]])
    x = x - x.mean()
    y = y - y.mean()
    denom = np.sqrt((x * x).sum() * (y * y).sum())
    if denom == 0:
        raise UndefinedMeasure("all edge endpoints have equal degree")
    return float((x * y).sum() / denom)


# ---------------------------------------------------------------------------
# Triangles and clustering
# ---------------------------------------------------------------------------

def _paths_of_length_two(g: Graph, guard: BudgetGuard) -> sparse.csr_matrix:
    deg = g.degrees
    guard.reserve(int((deg * deg).sum()) * 2 * FLOAT_BYTES, "A @ A")
    guard.check()
    return (g.csr @ g.csr).tocsr()


def node_triangles(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    closed = _paths_of_length_two(g, guard).multiply(g.csr)
    return np.asarray(closed.sum(axis=1)).ravel() / 2.0


def triangle_count(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(node_triangles(g, guard, ctx).sum() / 3.0)


def _triples(g: Graph) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    return deg * (deg - 1) / 2.0


def transitivity(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    """3 * triangles / connected triples; 0 when the graph has no triple."""
    triples = _triples(g).sum()
    if triples == 0:
        return 0.0
    return float(node_triangles(g, guard, ctx).sum() / triples)


def local_clustering(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    triples = _triples(g)
    out = np.zeros(g.n, dtype=np.float64)
    np.divide(node_triangles(g, guard, ctx), triples, out=out, where=triples > 0)
    return out


def edge_embeddedness(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    """Common-neighbour count of every edge."""
    if g.edge_count == 0:
        raise UndefinedMeasure("no edges")
    two_paths = _paths_of_length_two(g, guard)
    us, vs = np.array(list(g.edges()), dtype=np.int64).T
    return np.asarray(two_paths[us, vs], dtype=np.float64).ravel()


# ---------------------------------------------------------------------------
# Cores and cliques
# ---------------------------------------------------------------------------

def core_number(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    """Bucket peeling: repeatedly remove a node of minimum remaining degree."""
    deg = g.degrees.copy()
    max_deg = int(deg.max()) if g.n else 0
    buckets: List[Set[int]] = [set() for _ in range(max_deg + 1)]
    for v in range(g.n):
        buckets[deg[v]].add(v)
    core = np.zeros(g.n, dtype=np.float64)
    removed = np.zeros(g.n, dtype=bool)
    k = 0
    for step in range(g.n):
        if step % 1024 == 0:
            guard.check()
        while not buckets[k]:
            k += 1
        v = buckets[k].pop()
        removed[v] = True
        core[v] = k
        for w in g.adjacency[v]:
            if removed[w] or deg[w] <= k:
                continue
            buckets[deg[w]].discard(w)
            deg[w] -= 1
            buckets[deg[w]].add(w)
    return core


def max_core_number(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(core_number(g, guard, ctx).max())


def iter_maximal_cliques(g: Graph, guard: BudgetGuard) -> Iterator[List[int]]:
    """Bron-Kerbosch with Tomita pivoting, iterative, checking the deadline per call."""
    nbrs = g.neighbour_sets
    stack = [([], set(range(g.n)), set())]
    while stack:
        guard.check()
        clique, candidates, excluded = stack.pop()
        if not candidates and not excluded:
            yield clique
            continue
        if not candidates:
            continue
        pivot = max(candidates | excluded, key=lambda u: len(nbrs[u] & candidates))
        for v in sorted(candidates - nbrs[pivot]):
            stack.append((clique + [v], candidates & nbrs[v], excluded & nbrs[v]))
            candidates = candidates - {v}
            excluded = excluded | {v}


def clique_number(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(max(len(c) for c in iter_maximal_cliques(g, guard)))


def maximal_clique_count(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(sum(1 for _ in iter_maximal_cliques(g, guard)))


# ---------------------------------------------------------------------------
# Spectral
# ---------------------------------------------------------------------------

def _perron_vector(g: Graph, guard: BudgetGuard) -> np.ndarray:
    """
    Power iteration on A + I from the all-ones vector.

    Converges on connected graphs because A + I is primitive; the vector is
    returned with unit L2 norm.
    """
    shifted = (g.csr + sparse.identity(g.n, format="csr")).tocsr()
    x = np.ones(g.n, dtype=np.float64)
    x /= np.abs(x).max()
    for it in range(ITERATION_CAP):
        if it % 64 == 0:
            guard.check()
        y = shifted @ x
        y /= np.abs(y).max()
        if np.abs(y - x).max() < ITERATION_TOLERANCE:
            return y / np.linalg.norm(y)
        x = y
    raise UndefinedMeasure(f"power iteration did not converge in {ITERATION_CAP} steps")


def spectral_radius(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    x = _perron_vector(g, guard)
    return float(x @ (g.csr @ x) / (x @ x))


def eigenvector_centrality(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    return _perron_vector(g, guard)


def pagerank(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    """Power iteration with uniform teleport; L-infinity tolerance."""
    if g.n == 1:
        return np.ones(1, dtype=np.float64)
    deg = g.degrees.astype(np.float64)
    if (deg == 0).any():
        raise UndefinedMeasure("pagerank needs a graph without isolated nodes")
    x = np.full(g.n, 1.0 / g.n)
    teleport = (1.0 - PAGERANK_DAMPING) / g.n
    for it in range(ITERATION_CAP):
        if it % 64 == 0:
            guard.check()
        y = teleport + PAGERANK_DAMPING * (g.csr @ (x / deg))
        if np.abs(y - x).max() < ITERATION_TOLERANCE:
            return y / y.sum()
        x = y
    raise UndefinedMeasure(f"pagerank did not converge in {ITERATION_CAP} steps")


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------

def iter_distance_rows(
    g: Graph, guard: BudgetGuard, ctx: MeasureContext
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """BFS distance rows for the sources, DISTANCE_CHUNK sources per csgraph call."""
    sources = ctx.sources(g)
    chunk = min(DISTANCE_CHUNK, len(sources))
    nbytes = chunk * g.n * FLOAT_BYTES
    guard.reserve(nbytes, "distance chunk")
    try:
        for start in range(0, len(sources), chunk):
            guard.check()
            idx = sources[start:start + chunk]
            dist = csgraph.shortest_path(g.csr, method="D", unweighted=True, indices=idx)
            if np.isinf(dist).any():
                raise UndefinedMeasure("graph is not connected")
            yield idx, dist
    finally:
        guard.release(nbytes)


def eccentricity(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    """Eccentricity of every source node (all nodes unless sampled)."""
    return np.concatenate([dist.max(axis=1) for _, dist in iter_distance_rows(g, guard, ctx)])


def diameter(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(eccentricity(g, guard, ctx).max())


def radius(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    return float(eccentricity(g, guard, ctx).min())


def _distance_sums(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> Tuple[float, float, int]:
    """(sum of distances, sum of inverse distances, number of source rows)."""
    total = 0.0
    inverse = 0.0
    rows = 0
    for idx, dist in iter_distance_rows(g, guard, ctx):
        total += float(dist.sum())
        positive = dist[dist > 0]
        inverse += float((1.0 / positive).sum())
        rows += len(idx)
    return total, inverse, rows


def average_shortest_path(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    if g.n < 2:
        raise UndefinedMeasure("no node pairs")
    total, _, rows = _distance_sums(g, guard, ctx)
    return total / (rows * (g.n - 1))


def global_efficiency(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> float:
    if g.n < 2:
        raise UndefinedMeasure("no node pairs")
    _, inverse, rows = _distance_sums(g, guard, ctx)
    return inverse / (rows * (g.n - 1))


def closeness(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    """(n - 1) / sum of distances, per source node; 0 for a single node."""
    if g.n < 2:
        return np.zeros(g.n, dtype=np.float64)
    return np.concatenate(
        [(g.n - 1) / dist.sum(axis=1) for _, dist in iter_distance_rows(g, guard, ctx)]
    )


@njit(cache=True)
def _brandes_accumulate(indptr, indices, sources, node_acc, arc_acc):
    """Brandes dependency accumulation from each source; arc_acc is indexed by CSR position."""
    n = indptr.shape[0] - 1
    sigma = np.zeros(n, dtype=np.float64)
    dist = np.full(n, -1, dtype=np.int64)
    delta = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in sources:
        sigma[:] = 0.0
        dist[:] = -1
        delta[:] = 0.0
        sigma[s] = 1.0
        dist[s] = 0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for i in range(tail - 1, -1, -1):
            w = order[i]
            for p in range(indptr[w], indptr[w + 1]):
                v = indices[p]
                if dist[v] == dist[w] - 1:
                    c = sigma[v] / sigma[w] * (1.0 + delta[w])
                    arc_acc[p] += c
                    delta[v] += c
            if w != s:
                node_acc[w] += delta[w]


def _brandes(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> Tuple[np.ndarray, np.ndarray]:
    """Raw pair-count node and edge betweenness (edges in g.edges() order)."""
    csr = g.csr
    indptr = csr.indptr.astype(np.int64)
    indices = csr.indices.astype(np.int64)
    guard.reserve((g.n * 5 + len(indices)) * FLOAT_BYTES, "brandes state")
    sources = ctx.sources(g)
    node_acc = np.zeros(g.n, dtype=np.float64)
    arc_acc = np.zeros(len(indices), dtype=np.float64)
    for start in range(0, len(sources), DISTANCE_CHUNK):
        guard.check()
        _brandes_accumulate(indptr, indices, sources[start:start + DISTANCE_CHUNK], node_acc, arc_acc)

    scale = g.n / len(sources) if len(sources) else 1.0
    # every unordered pair was counted from both endpoints
    node_bc = node_acc * scale / 2.0
    edge_bc = np.empty(g.edge_count, dtype=np.float64)
    for i, (u, v) in enumerate(g.edges()):
        pu = indptr[u] + np.searchsorted(indices[indptr[u]:indptr[u + 1]], v)
        pv = indptr[v] + np.searchsorted(indices[indptr[v]:indptr[v + 1]], u)
        edge_bc[i] = (arc_acc[pu] + arc_acc[pv]) * scale / 2.0
    return node_bc, edge_bc


def betweenness(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    return _brandes(g, guard, ctx)[0]


def edge_betweenness(g: Graph, guard: BudgetGuard, ctx: MeasureContext) -> np.ndarray:
    if g.edge_count == 0:
        raise UndefinedMeasure("no edges")
    return _brandes(g, guard, ctx)[1]


MEASURE_FUNCTIONS: Dict[str, object] = {
    "density": density,
    "transitivity": transitivity,
    "degree_assortativity": degree_assortativity,
    "max_core_number": max_core_number,
    "triangle_count": triangle_count,
    "clique_number": clique_number,
    "maximal_clique_count": maximal_clique_count,
    "spectral_radius": spectral_radius,
    "diameter": diameter,
    "radius": radius,
    "average_shortest_path": average_shortest_path,
    "global_efficiency": global_efficiency,
    "node_count": node_count,
    "edge_count": edge_count,
    "degree": degree,
    "local_clustering": local_clustering,
    "core_number": core_number,
    "node_triangles": node_triangles,
    "eccentricity": eccentricity,
    "betweenness": betweenness,
    "closeness": closeness,
    "eigenvector_centrality": eigenvector_centrality,
    "pagerank": pagerank,
    "average_neighbor_degree": average_neighbor_degree,
    "edge_betweenness": edge_betweenness,
    "edge_embeddedness": edge_embeddedness,
}
