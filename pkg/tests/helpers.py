"""Small graph and matrix builders shared by the test suites."""
import pandas as pd

from netdomain.schemas import FeatureMatrix, Graph


def graph_from_nx(G) -> Graph:
    """netdomain Graph with nodes renumbered 0..n-1 in sorted order."""
    nodes = sorted(G.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    edges = [(index[u], index[v]) for u, v in G.edges()]
    return Graph.from_edges(len(nodes), edges, [str(v) for v in nodes])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def make_matrix(values: dict, domains: list, index=None) -> FeatureMatrix:
    """FeatureMatrix from column lists; NaN entries become missing cells."""
    index = index or [f"n{i:03d}" for i in range(len(domains))]
    frame = pd.DataFrame(values, index=index, dtype=float)
    return FeatureMatrix.from_values(frame, pd.Series(domains, index=index))
