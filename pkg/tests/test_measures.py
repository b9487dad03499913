"""
Measure catalog tests.

Every core measure is checked against networkx (or a dense numpy
computation) on all connected graphs of 2 to 6 nodes, a sample of the
7-node atlas and random 8-node graphs.
"""
import itertools

import networkx as nx
import numpy as np
import pytest
from networkx.generators.atlas import graph_atlas_g

from netdomain.core.enums import CostClass, MeasureKind, MissingReason
from netdomain.core.exceptions import UnknownMeasureError
from netdomain.schemas import Budget, BudgetPolicy, MeasureSpec, SamplingConfig
from netdomain.services.measures import (
    aggregate_distribution,
    catalog,
    compute_corpus_features,
    compute_feature_vector,
    feature_columns,
    get_measure,
    measure_of_column,
    register_measure,
    run_measure,
    unregister_measure,
)
from tests.helpers import complete_graph, cycle_graph, graph_from_nx, path_graph, star_graph

EXACT = Budget(wall_time=60, memory=2 * 1024**3)
RTOL = 1e-9
# power-iteration measures stop on a 1e-10 step change
ITERATIVE_ATOL = 1e-8


def _oracle_graphs():
    graphs = [G for G in graph_atlas_g() if 2 <= G.number_of_nodes() <= 6 and nx.is_connected(G)]
    seven = [G for G in graph_atlas_g() if G.number_of_nodes() == 7 and nx.is_connected(G)]
    graphs += seven[::10]
    gen = np.random.default_rng(2024)
    while len(graphs) < 300:
        G = nx.gnp_random_graph(8, 0.4, seed=int(gen.integers(0, 2**31)))
        if nx.is_connected(G):
            graphs.append(G)
    return graphs


ORACLE_GRAPHS = _oracle_graphs()


def _dense_pagerank(G, d=0.85):
    A = nx.to_numpy_array(G, nodelist=sorted(G.nodes()))
    n = len(A)
    P = A / A.sum(axis=0)
    x = np.linalg.solve(np.eye(n) - d * P, np.full(n, (1 - d) / n))
    return x / x.sum()


def _perron(G):
    A = nx.to_numpy_array(G, nodelist=sorted(G.nodes()))
    vals, vecs = np.linalg.eigh(A)
    v = vecs[:, -1]
    v = v if v.sum() > 0 else -v
    return vals[-1], v / np.linalg.norm(v)


def _oracle(G, measure_id):
    """Expected raw value (float or node/edge-ordered array), or None when undefined."""
    nodes = sorted(G.nodes())
    edges = sorted((min(u, v), max(u, v)) for u, v in G.edges())
    n = G.number_of_nodes()
    if measure_id == "node_count":
        return float(n)
    if measure_id == "edge_count":
        return float(G.number_of_edges())
    if measure_id == "density":
        return nx.density(G)
    if measure_id == "transitivity":
        return nx.transitivity(G)
    if measure_id == "degree_assortativity":
        degrees = [d for _, d in G.degree()]
        if len(set(degrees)) == 1:
            return None
        return nx.degree_assortativity_coefficient(G)
    if measure_id == "max_core_number":
        return float(max(nx.core_number(G).values()))
    if measure_id == "triangle_count":
        return float(sum(nx.triangles(G).values()) / 3)
    if measure_id == "clique_number":
        return float(max(len(c) for c in nx.find_cliques(G)))
    if measure_id == "maximal_clique_count":
        return float(sum(1 for _ in nx.find_cliques(G)))
    if measure_id == "spectral_radius":
        return _perron(G)[0]
    if measure_id == "diameter":
        return float(nx.diameter(G))
    if measure_id == "radius":
        return float(nx.radius(G))
    if measure_id == "average_shortest_path":
        return nx.average_shortest_path_length(G)
    if measure_id == "global_efficiency":
        return nx.global_efficiency(G)
    if measure_id == "degree":
        return np.array([G.degree(v) for v in nodes], dtype=float)
    if measure_id == "local_clustering":
        clustering = nx.clustering(G)
        return np.array([clustering[v] for v in nodes])
    if measure_id == "core_number":
        cores = nx.core_number(G)
        return np.array([cores[v] for v in nodes], dtype=float)
    if measure_id == "node_triangles":
        triangles = nx.triangles(G)
        return np.array([triangles[v] for v in nodes], dtype=float)
    if measure_id == "eccentricity":
        ecc = nx.eccentricity(G)
        return np.array([ecc[v] for v in nodes], dtype=float)
    if measure_id == "betweenness":
        bc = nx.betweenness_centrality(G, normalized=False)
        return np.array([bc[v] for v in nodes])
    if measure_id == "closeness":
        cc = nx.closeness_centrality(G)
        return np.array([cc[v] for v in nodes])
    if measure_id == "eigenvector_centrality":
        return _perron(G)[1]
    if measure_id == "pagerank":
        return _dense_pagerank(G)
    if measure_id == "average_neighbor_degree":
        and_ = nx.average_neighbor_degree(G)
        return np.array([and_[v] for v in nodes])
    if measure_id == "edge_betweenness":
        ebc = nx.edge_betweenness_centrality(G, normalized=False)
        lookup = {(min(u, v), max(u, v)): value for (u, v), value in ebc.items()}
        return np.array([lookup[e] for e in edges])
    if measure_id == "edge_embeddedness":
        return np.array([len(list(nx.common_neighbors(G, u, v))) for u, v in edges], dtype=float)
    raise KeyError(measure_id)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.id)
def test_measure_matches_oracle(spec):
    iterative = spec.id in {"eigenvector_centrality", "pagerank"}
    for G in ORACLE_GRAPHS:
        g = graph_from_nx(G)
        expected = _oracle(G, spec.id)
        result = run_measure(g, spec, EXACT, seed=0)
        if expected is None:
            assert result.missing_reason == MissingReason.UNDEFINED, nx.to_edgelist(G)
            continue
        assert not result.missing, (spec.id, list(G.edges()))
        if iterative:
            np.testing.assert_allclose(result.value, expected, rtol=RTOL, atol=ITERATIVE_ATOL)
        else:
            np.testing.assert_allclose(result.value, expected, rtol=RTOL, atol=1e-12)


def test_oracle_fixture_is_large_enough():
    assert len(ORACLE_GRAPHS) >= 200
    assert min(G.number_of_nodes() for G in ORACLE_GRAPHS) == 2
    assert max(G.number_of_nodes() for G in ORACLE_GRAPHS) == 8


def test_single_node_graph():
    g = path_graph(1)
    vector = compute_feature_vector(g, EXACT, seed=0).as_dict()
    assert vector["node_count"] == 1.0
    assert vector["density"] is None
    assert vector["degree_assortativity"] is None
    assert vector["edge_betweenness__mean"] is None
    assert vector["clique_number"] == 1.0
    assert vector["max_core_number"] == 0.0


def test_known_values_on_small_graphs():
    k4 = compute_feature_vector(complete_graph(4), EXACT, seed=0).as_dict()
    assert k4["density"] == 1.0
    assert k4["transitivity"] == 1.0
    assert k4["triangle_count"] == 4.0
    assert k4["clique_number"] == 4.0
    assert k4["diameter"] == 1.0
    assert k4["spectral_radius"] == pytest.approx(3.0, rel=RTOL)

    star = compute_feature_vector(star_graph(5), EXACT, seed=0).as_dict()
    assert star["degree_assortativity"] == pytest.approx(-1.0)
    assert star["transitivity"] == 0.0
    assert star["betweenness__max"] == 10.0

    ring = compute_feature_vector(cycle_graph(6), EXACT, seed=0).as_dict()
    assert ring["degree_assortativity"] is None
    assert ring["max_core_number"] == 2.0


def test_aggregate_distribution_values():
    agg = aggregate_distribution([1.0, 2.0, 3.0, 4.0])
    assert agg.mean == 2.5
    assert (agg.min, agg.max) == (1.0, 4.0)
    assert agg.m1 == pytest.approx(0.625)
    assert agg.m2 == pytest.approx((1 + 4 + 9 + 16) / 16 / 4)


def test_aggregate_distribution_uses_absolute_scale():
    agg = aggregate_distribution([-2.0, 1.0])
    assert agg.m1 == pytest.approx((-1.0 + 0.5) / 2)
    assert agg.m3 == pytest.approx((-1.0 + 0.125) / 2)


def test_aggregate_all_zero_distribution():
    agg = aggregate_distribution([0.0, 0.0])
    assert agg.as_list() == [0.0] * 7


def test_aggregate_rejects_bad_input():
    with pytest.raises(ValueError):
        aggregate_distribution([])
    with pytest.raises(ValueError):
        aggregate_distribution([1.0, float("nan")])


def test_zero_budget_is_timeout():
    result = run_measure(complete_graph(5), "triangle_count", Budget(wall_time=0, memory=10**9), seed=0)
    assert result.missing_reason == MissingReason.TIMEOUT


def test_tiny_memory_budget_is_memory_miss():
    result = run_measure(path_graph(50), "diameter", Budget(wall_time=60, memory=8), seed=0)
    assert result.missing_reason == MissingReason.MEMORY


def test_budget_policy_routes_by_class_and_override():
    policy = BudgetPolicy(
        expensive=Budget(wall_time=0, memory=10**9),
        overrides={"diameter": Budget(wall_time=60, memory=10**9)},
    )
    vector = compute_feature_vector(path_graph(6), policy, seed=0)
    values = vector.as_dict()
    assert values["diameter"] == 5.0
    assert values["radius"] is None
    assert vector.reasons["radius"] == MissingReason.TIMEOUT
    assert values["density"] is not None


def test_vector_is_aligned_to_canonical_columns():
    vector = compute_feature_vector(path_graph(5), EXACT, seed=0)
    assert vector.columns == feature_columns()
    assert len(vector.columns) == len(set(vector.columns))
    assert feature_columns()[0] == "density"


def test_sampled_shortest_paths_are_seeded_and_flagged():
    G = nx.connected_watts_strogatz_graph(120, 4, 0.2, seed=3)
    g = graph_from_nx(G)
    sampling = SamplingConfig(exact_max_nodes=50, sample_sources=30)
    a = run_measure(g, "closeness", EXACT, seed=11, sampling=sampling)
    b = run_measure(g, "closeness", EXACT, seed=11, sampling=sampling)
    c = run_measure(g, "closeness", EXACT, seed=12, sampling=sampling)
    assert a.sampled
    assert len(a.value) == 30
    np.testing.assert_array_equal(a.value, b.value)
    assert not np.array_equal(a.value, c.value)


def test_sampled_betweenness_is_unbiased_scale():
    g = cycle_graph(100)
    sampling = SamplingConfig(exact_max_nodes=10, sample_sources=50)
    result = run_measure(g, "betweenness", EXACT, seed=1, sampling=sampling)
    exact = run_measure(g, "betweenness", EXACT, seed=1)
    # vertex-transitive graph: every source contributes the same total
    assert result.value.sum() == pytest.approx(exact.value.sum(), rel=1e-9)


def test_unknown_measure():
    with pytest.raises(UnknownMeasureError):
        get_measure("no_such_measure")


def test_column_names_map_back_to_measures():
    for column in feature_columns():
        get_measure(measure_of_column(column))
    assert measure_of_column("degree__m3") == "degree"


def test_register_extension_measure():
    spec = MeasureSpec(id="leaf_fraction", kind=MeasureKind.SCALAR, cost_class=CostClass.CHEAP)

    def leaf_fraction(g, guard, ctx):
        return float((g.degrees == 1).mean())

    register_measure(spec, leaf_fraction)
    try:
        assert catalog()[-1].id == "leaf_fraction"
        assert feature_columns()[-1] == "leaf_fraction"
        assert run_measure(star_graph(4), "leaf_fraction", EXACT, seed=0).value == 0.8
        with pytest.raises(ValueError):
            register_measure(spec, leaf_fraction)
    finally:
        unregister_measure("leaf_fraction")
    assert "leaf_fraction" not in feature_columns()


def test_core_measures_cannot_be_removed():
    with pytest.raises(ValueError):
        unregister_measure("degree")


def _connected_gnp(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    while not nx.is_connected(G):
        seed += 101
        G = nx.gnp_random_graph(n, p, seed=seed)
    return G


def test_relabeling_does_not_change_any_column():
    gen = np.random.default_rng(17)
    fixtures = [
        graph_from_nx(_connected_gnp(8, 0.5, seed=5)),
        graph_from_nx(_connected_gnp(10, 0.3, seed=9)),
        graph_from_nx(nx.lollipop_graph(4, 3)),
        star_graph(6),
    ]
    for g in fixtures:
        base = compute_feature_vector(g, EXACT, seed=0)
        for _ in range(15):
            h = g.relabel([int(v) for v in gen.permutation(g.n)])
            vector = compute_feature_vector(h, EXACT, seed=0)
            assert vector.columns == base.columns
            np.testing.assert_array_equal(vector.missing, base.missing)
            np.testing.assert_allclose(vector.values, base.values, rtol=RTOL, atol=ITERATIVE_ATOL)


def test_corpus_features_do_not_depend_on_worker_count():
    graphs = {
        "cycle": cycle_graph(12),
        "star": star_graph(9),
        "lollipop": graph_from_nx(nx.lollipop_graph(5, 4)),
        "ws": graph_from_nx(nx.connected_watts_strogatz_graph(60, 4, 0.2, seed=3)),
    }
    policy = BudgetPolicy(default=EXACT, overrides={"clique_number": Budget(wall_time=0, memory=10**9)})
    sampling = SamplingConfig(exact_max_nodes=30, sample_sources=12)
    serial = compute_corpus_features(graphs, policy, seed=3, sampling=sampling, jobs=1)
    pooled = compute_corpus_features(graphs, policy, seed=3, sampling=sampling, jobs=2)
    assert list(serial) == list(pooled) == sorted(graphs)
    for network_id in graphs:
        a, b = serial[network_id], pooled[network_id]
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.missing, b.missing)
        assert a.reasons == b.reasons
        assert a.sampled == b.sampled
    assert serial["ws"].sampled


def test_failing_extension_measure_becomes_missing():
    spec = MeasureSpec(id="broken", kind=MeasureKind.NODE_DISTRIBUTION, cost_class=CostClass.CHEAP)

    def broken(g, guard, ctx):
        raise ZeroDivisionError("bug in extension")

    register_measure(spec, broken)
    try:
        result = run_measure(path_graph(4), "broken", EXACT, seed=0)
        assert result.missing
        assert result.missing_reason == MissingReason.FAILED
        vector = compute_feature_vector(path_graph(4), EXACT, seed=0)
        values = vector.as_dict()
        assert values["broken__mean"] is None
        assert vector.reasons["broken__m4"] == MissingReason.FAILED
        assert values["density"] is not None
    finally:
        unregister_measure("broken")
