import networkx as nx
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gtfl0.errors import (
    DegenerateFeatures,
    DisconnectedGraph,
    IndexOutOfRange,
    ProbabilityOutOfRange,
    SelfLoop,
)
from gtfl0.graph import (
    build_graph,
    components,
    inter_community_edges,
    is_connected,
    knn_graph,
    planted_partition,
    read_edge_list,
    write_edge_list,
)

from conftest import random_connected_graph


def test_path_graph_degrees_and_laplacian():
    g = build_graph(3, [(0, 1), (1, 2)])
    assert g.degrees.tolist() == [1, 2, 1]
    assert np.diag(g.laplacian_dense).tolist() == [1, 2, 1]
    expected = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_array_equal(g.laplacian_dense, expected)
    np.testing.assert_array_equal(g.laplacian_sparse.toarray(), expected)


def test_duplicate_edges_collapse():
    a = build_graph(3, [(0, 1), (1, 0), (1, 2)])
    b = build_graph(3, [(0, 1), (1, 2)])
    np.testing.assert_array_equal(a.edges, b.edges)
    assert a.m == 2


def test_disconnected_reports_component_count():
    with pytest.raises(DisconnectedGraph) as exc:
        build_graph(4, [(0, 1), (2, 3)])
    assert exc.value.n_components == 2


def test_bad_edges_rejected():
    with pytest.raises(SelfLoop):
        build_graph(3, [(0, 1), (1, 1)])
    with pytest.raises(IndexOutOfRange):
        build_graph(3, [(0, 3)])
    with pytest.raises(IndexOutOfRange):
        build_graph(3, [(-1, 0)])


def test_components_and_connectivity():
    path = build_graph(4, [(0, 1), (1, 2), (2, 3)])
    assert is_connected(path)
    two = build_graph(4, [(0, 1), (2, 3)], require_connected=False)
    assert not is_connected(two)
    assert components(two).tolist() == [0, 0, 1, 1]


def test_components_match_networkx(rng):
    for _ in range(20):
        n = int(rng.integers(2, 30))
        iu, ju = np.triu_indices(n, 1)
        keep = rng.random(iu.size) < 0.08
        g = build_graph(n, np.column_stack([iu[keep], ju[keep]]), require_connected=False)
        ref = nx.Graph()
        ref.add_nodes_from(range(n))
        ref.add_edges_from(g.edges.tolist())
        ours = components(g)
        for comp in nx.connected_components(ref):
            assert len({ours[i] for i in comp}) == 1
        assert ours.max() + 1 == nx.number_connected_components(ref)


def test_planted_partition_reference_instance():
    g, labels = planted_partition([50, 70, 80], 0.2, 0.05, seed=7)
    assert g.n == 200 and is_connected(g)
    assert np.bincount(labels).tolist() == [50, 70, 80]
    again, _ = planted_partition([50, 70, 80], 0.2, 0.05, seed=7)
    np.testing.assert_array_equal(g.edges, again.edges)


def test_planted_partition_complete_graph():
    g, labels = planted_partition([3], 1.0, 0.0, seed=3)
    assert g.edge_set() == {(0, 1), (0, 2), (1, 2)}
    assert labels.tolist() == [0, 0, 0]


def test_planted_partition_edge_count_matches_reported_mean():
    counts = [planted_partition([50, 70, 80], 0.1, 0.01, seed=s)[0].m for s in range(10)]
    # reported: 805 edges with std 23
    assert abs(np.mean(counts) - 805) <= 3 * 23


def test_planted_partition_rejects_bad_probabilities():
    with pytest.raises(ProbabilityOutOfRange):
        planted_partition([5, 5], 0.1, 0.2)
    with pytest.raises(ProbabilityOutOfRange):
        planted_partition([5, 5], 1.5, 0.2)


def test_planted_partition_records_repairs():
    g, _ = planted_partition([10, 10], 0.0, 0.0, seed=0)
    assert is_connected(g)
    assert g.meta["repair_edges"] == g.m == 19


def test_knn_collinear_union():
    g = knn_graph(np.array([[0.0], [1.0], [10.0]]), 1)
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_knn_full_when_n_is_k_plus_one(rng):
    g = knn_graph(rng.standard_normal((6, 3)), 5)
    assert g.m == 15


def test_knn_iris_style_min_degree(rng):
    centers = np.array([[5.0, 3.4, 1.5, 0.2], [5.9, 2.8, 4.3, 1.3], [6.6, 3.0, 5.5, 2.0]])
    x = np.repeat(centers, 50, axis=0) + 0.3 * rng.standard_normal((150, 4))
    g = knn_graph(x, 5, seed=0)
    assert g.n == 150
    assert g.degrees.min() >= 5


def test_knn_tie_prefers_lower_index():
    # node 1 is equidistant from 0 and 2
    g = knn_graph(np.array([[0.0], [1.0], [2.0], [50.0]]), 1, seed=0)
    assert (0, 1) in g.edge_set()
    assert (1, 2) in g.edge_set()  # 2's own nearest neighbour is 1


def test_knn_degenerate():
    with pytest.raises(DegenerateFeatures):
        knn_graph(np.zeros((5, 2)), 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_knn_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 3))
    g = knn_graph(x, 5, seed=0)
    assume(g.meta["repair_edges"] == 0)
    perm = rng.permutation(40)
    h = knn_graph(x[perm], 5, seed=0)
    # node a of h is node perm[a] of g
    mapped = {tuple(sorted((int(perm[a]), int(perm[b])))) for a, b in h.edges}
    assert mapped == g.edge_set()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 40), st.floats(0.0, 0.5))
def test_laplacian_invariants(seed, n, p):
    g = random_connected_graph(n, p, np.random.default_rng(seed))
    lap = g.laplacian_dense
    assert int(np.trace(lap)) == int(g.degrees.sum()) == 2 * g.m
    np.testing.assert_array_equal(lap @ np.ones(n), np.zeros(n))
    a = g.adjacency.toarray()
    np.testing.assert_array_equal(a, a.T)
    assert np.all(np.diag(a) == 0) and set(np.unique(a)) <= {0, 1}
    np.testing.assert_array_equal(a.sum(axis=1), g.degrees)
    w = np.linalg.eigvalsh(lap)
    assert w.min() > -1e-9 and abs(w[0]) < 1e-9
    assert is_connected(g)


def test_planted_graphs_symmetric_zero_diagonal():
    for s in range(100):
        g, _ = planted_partition([10, 12, 8], 0.3, 0.05, seed=s)
        a = g.adjacency
        assert (a != a.T).nnz == 0
        assert not a.diagonal().any()


def test_laplacian_dense_sparse_switch():
    g = build_graph(3, [(0, 1), (1, 2)])
    assert isinstance(g.laplacian(), np.ndarray)
    assert not isinstance(g.laplacian(dense=False), np.ndarray)


def test_edge_list_roundtrip(tmp_path):
    g, _ = planted_partition([6, 6], 0.6, 0.1, seed=2)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    h = read_edge_list(path)
    np.testing.assert_array_equal(g.edges, h.edges)


def test_edge_list_comments_blanks_and_repair(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# header\n\n0 1\n1 0\n  \n2 3\n# trailing\n")
    with pytest.raises(DisconnectedGraph):
        read_edge_list(path)
    g = read_edge_list(path, repair=True, seed=0)
    assert is_connected(g) and g.m == 3 and g.meta["repair_edges"] == 1


def test_inter_community_edges():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3)])
    assert inter_community_edges(g, [0, 0, 1, 1]).tolist() == [False, True, False]
