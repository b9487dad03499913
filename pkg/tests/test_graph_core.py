"""Tests for edge-list parsing and graph canonicalization."""
import pytest
from networkx.algorithms import bipartite

from netdomain.core.enums import ProjectionSide
from netdomain.core.exceptions import GraphError, GraphParseError
from netdomain.schemas import Graph
from netdomain.services.graph_core import (
    canonicalize,
    connected_components,
    detect_bipartite,
    giant_component,
    parse_edge_list,
    project_bipartite,
    read_edge_list,
    read_graph,
    resolve_side,
    simplify,
    write_graph,
)
from tests.helpers import complete_graph, cycle_graph, path_graph, star_graph


def test_parse_skips_comments_and_extra_tokens():
    raw = parse_edge_list("# header\n% other\n\na b 1.5\nb c 2 1700000000\n")
    assert raw.node_labels == ("a", "b", "c")
    assert raw.edges == ((0, 1), (1, 2))


def test_parse_keeps_duplicates_and_loops():
    raw = parse_edge_list("1 2\n2 1\n1 1\n")
    assert len(raw.edges) == 3
    assert raw.n == 2


def test_parse_reports_line_number():
    with pytest.raises(GraphParseError) as exc:
        parse_edge_list("1 2\n# ok\n3\n")
    assert exc.value.line == 3


def test_parse_rejects_empty_input():
    with pytest.raises(GraphParseError):
        parse_edge_list("# nothing here\n\n")


def test_read_edge_list_names_the_file(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("1 2\nlonely\n")
    with pytest.raises(GraphParseError, match="broken.txt"):
        read_edge_list(path)


def test_simplify_triangle_with_noise():
    g = simplify(parse_edge_list("1 2\n2 3\n3 1\n1 1\n2 1\n"))
    assert g.n == 3
    assert g.edge_count == 3


def test_giant_component_keeps_largest():
    raw = parse_edge_list("1 2\n2 3\n3 1\n4 5\n")
    g = giant_component(simplify(raw))
    assert g.n == 3
    assert g.edge_count == 3
    assert sorted(g.labels) == ["1", "2", "3"]


def test_giant_component_tie_goes_to_smallest_label():
    g = giant_component(simplify(parse_edge_list("10 11\n2 3\n")))
    assert sorted(g.labels) == ["2", "3"]


def test_giant_component_integer_labels_compare_numerically():
    g = giant_component(simplify(parse_edge_list("9 8\n10 11\n")))
    assert sorted(g.labels) == ["8", "9"]


def test_giant_component_of_empty_graph():
    with pytest.raises(GraphError):
        giant_component(Graph.from_edges(0, []))


def test_connected_components_partition_nodes():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (3, 4)])
    components = connected_components(g)
    assert sorted(len(c) for c in components) == [1, 2, 3]
    assert sorted(v for c in components for v in c) == list(range(6))


def test_connected_components_order_by_smallest_node():
    g = Graph.from_edges(7, [(5, 1), (3, 6), (0, 4), (6, 2)])
    assert connected_components(g) == [[0, 4], [1, 5], [2, 3, 6]]
    assert connected_components(Graph.from_edges(0, [])) == []


def test_bipartite_detection():
    assert detect_bipartite(cycle_graph(6)) is not None
    assert detect_bipartite(cycle_graph(5)) is None
    assert detect_bipartite(complete_graph(3)) is None


def test_bipartite_root_is_left():
    partition = detect_bipartite(path_graph(4))
    assert partition.side_of[0] == ProjectionSide.LEFT
    assert partition.members(ProjectionSide.LEFT) == [0, 2]


def test_star_projects_to_clique_on_leaves():
    g = star_graph(4)
    partition = detect_bipartite(g)
    projected = project_bipartite(g, partition, ProjectionSide.LARGER)
    assert projected.n == 4
    assert projected.edge_count == 6


def test_projection_onto_smaller_side_of_star():
    g = star_graph(4)
    partition = detect_bipartite(g)
    projected = project_bipartite(g, partition, ProjectionSide.SMALLER)
    assert projected.n == 1
    assert projected.edge_count == 0


def test_projection_matches_networkx():
    reference = bipartite.random_graph(12, 9, 0.3, seed=5)
    g = Graph.from_edges(reference.number_of_nodes(), list(reference.edges()))
    partition = detect_bipartite(g)
    for side in (ProjectionSide.LEFT, ProjectionSide.RIGHT):
        kept = partition.members(side)
        projected = project_bipartite(g, partition, side)
        expected = bipartite.projected_graph(reference, kept)
        position = {v: i for i, v in enumerate(kept)}
        assert projected.n == len(kept)
        assert set(projected.edges()) == {
            tuple(sorted((position[u], position[v]))) for u, v in expected.edges()
        }


def test_resolve_side_on_equal_sizes_is_left():
    partition = detect_bipartite(path_graph(4))
    assert resolve_side(partition, ProjectionSide.LARGER) == ProjectionSide.LEFT
    assert resolve_side(partition, ProjectionSide.SMALLER) == ProjectionSide.LEFT


def test_projection_of_single_node_fails():
    g = Graph.from_edges(1, [])
    partition = detect_bipartite(g)
    with pytest.raises(GraphError):
        project_bipartite(g, partition, ProjectionSide.RIGHT)


def test_canonicalize_records_provenance():
    raw = parse_edge_list("1 2\n2 3\n3 1\n1 1\n2 1\n7 8\n")
    g, record = canonicalize(raw, "net")
    assert g.n == 3
    assert record.self_loops_removed == 1
    assert record.duplicates_removed == 1
    assert record.components == 2
    assert record.nodes == 3
    assert record.edges == 3
    assert record.bipartite is False
    assert record.projected_onto is None


def test_canonicalize_auto_projects_bipartite_graph():
    raw = parse_edge_list("hub a\nhub b\nhub c\n")
    g, record = canonicalize(raw, "net", auto_project=True)
    assert g.n == 3
    assert g.edge_count == 3
    assert record.projected_onto == ProjectionSide.RIGHT
    assert "auto-projected" in record.notes


def test_canonicalize_declared_but_not_bipartite_is_kept():
    raw = parse_edge_list("1 2\n2 3\n3 1\n")
    g, record = canonicalize(raw, "net", project_onto=ProjectionSide.LEFT)
    assert g.edge_count == 3
    assert record.projected_onto is None
    assert record.notes


def test_graph_files_round_trip(tmp_path):
    g = simplify(parse_edge_list("x y\ny z\nz x\nz w\n"))
    write_graph(tmp_path / "g.edges", tmp_path / "g.labels", g)
    assert read_graph(tmp_path / "g.edges", tmp_path / "g.labels") == g
