import numpy as np
import pytest

from fuseflow.graph import (
    Graph,
    grid_graph_2d,
    grid_graph_3d,
    node_edge_weight_sums,
    read_edge_list,
    validate,
    write_edge_list,
)


def test_grid_2d_counts():
    g = grid_graph_2d(2, 2)
    assert g.num_nodes == 4 and g.num_edges == 4
    g = grid_graph_2d(1, 1)
    assert g.num_nodes == 1 and g.num_edges == 0
    g = grid_graph_2d(3, 3)
    assert g.num_nodes == 9 and g.num_edges == 12
    assert np.all(g.weight == 1.0)


def test_grid_2d_edge_count_formula_exhaustive():
    for r in range(1, 21):
        for c in range(1, 21):
            assert grid_graph_2d(r, c).num_edges == r * (c - 1) + c * (r - 1)


def test_grid_3d_counts():
    assert grid_graph_3d(1, 1, 1).num_edges == 0
    g = grid_graph_3d(2, 1, 1)
    assert g.num_nodes == 2 and g.num_edges == 1
    g = grid_graph_3d(2, 2, 2)
    assert g.num_nodes == 8 and g.num_edges == 12


@pytest.mark.parametrize("bad", [(0, 3), (3, 0)])
def test_grid_2d_zero_dimension(bad):
    with pytest.raises(ValueError):
        grid_graph_2d(*bad)


def test_grid_3d_zero_dimension():
    with pytest.raises(ValueError):
        grid_graph_3d(2, 0, 2)


def test_canonical_order():
    a = grid_graph_2d(4, 5)
    b = grid_graph_2d(4, 5)
    assert np.array_equal(a.edge_i, b.edge_i)
    assert np.array_equal(a.edge_j, b.edge_j)
    # endpoint swap still canonicalizes to the same edge list
    c = Graph.from_edges(4, [(2, 0, 1.0), (3, 1, 1.0)])
    assert c.edges == [(0, 2, 1.0), (1, 3, 1.0)]


def test_zero_weight_edges_dropped():
    g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 0.0)])
    assert g.num_edges == 1


def test_validate_ok():
    validate(grid_graph_2d(2, 2))


def test_validate_index_out_of_range():
    g = Graph(3, np.array([1], np.int32), np.array([3], np.int32), np.array([1.0]))
    with pytest.raises(ValueError, match="out of range"):
        validate(g)


def test_validate_duplicate():
    with pytest.raises(ValueError, match="duplicate"):
        Graph.from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)])


def test_validate_nonpositive_weight():
    g = Graph(2, np.array([0], np.int32), np.array([1], np.int32), np.array([-1.0]))
    with pytest.raises(ValueError, match="nonpositive"):
        validate(g)


def test_node_edge_weight_sums():
    g = grid_graph_2d(1, 3)  # path 0-1-2
    sums = node_edge_weight_sums(g, np.array([2.0, 5.0]))
    assert np.array_equal(sums, [2.0, 7.0, 5.0])


def test_edge_list_roundtrip(tmp_path):
    g = grid_graph_2d(3, 4)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    back = read_edge_list(path)
    assert back.num_nodes == g.num_nodes
    assert np.array_equal(back.edge_i, g.edge_i)
    assert np.array_equal(back.edge_j, g.edge_j)
    assert np.array_equal(back.weight, g.weight)
    header = path.read_text().splitlines()[0]
    assert header == "nodes 12"


def test_edge_list_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("vertices 3\n0 1 1.0\n")
    with pytest.raises(ValueError, match="header"):
        read_edge_list(path)


def test_graph_is_immutable():
    g = grid_graph_2d(2, 2)
    with pytest.raises(ValueError):
        g.weight[0] = 5.0
