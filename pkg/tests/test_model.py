import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtfl0.errors import DimensionMismatch, EmptyCluster, LabelOutOfRange
from gtfl0.graph import build_graph, inter_community_edges, planted_partition
from gtfl0.model import (
    boundary_edges,
    centroid_closed_form,
    cluster_sizes,
    compact_labels,
    cut_size,
    default_tol,
    l20_penalty,
    laplacian_trace,
    make_solution,
    objective_p0,
    objective_p1,
    objective_q2,
    one_hot,
)

from conftest import random_connected_graph, random_labels

PATH3 = build_graph(3, [(0, 1), (1, 2)])
K3 = build_graph(3, [(0, 1), (0, 2), (1, 2)])


def _instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    k = int(rng.integers(1, n + 1))
    g = random_connected_graph(n, float(rng.uniform(0.05, 0.5)), rng)
    d = int(rng.integers(1, 4))
    y = rng.standard_normal((n, d)) * rng.uniform(0.1, 5)
    return g, y, random_labels(n, k, rng), float(rng.uniform(0, 3))


# -- penalty and cut ------------------------------------------------------------


def test_l20_examples():
    assert l20_penalty(np.ones((3, 2)), K3) == 0
    assert l20_penalty([0.0, 0.0, 1.0], PATH3) == 1
    assert l20_penalty(np.arange(6.0).reshape(3, 2), K3) == 3


def test_l20_tolerance_and_shape():
    b = np.array([0.0, 1e-12, 1.0])
    assert l20_penalty(b, PATH3) == 2
    assert l20_penalty(b, PATH3, tol=default_tol(b)) == 1
    with pytest.raises(DimensionMismatch):
        l20_penalty(np.zeros(4), PATH3)


def test_boundary_edges_examples():
    assert boundary_edges(np.ones(3), PATH3).shape == (0, 2)
    assert boundary_edges([0.0, 0.0, 1.0], PATH3).tolist() == [[1, 2]]
    with pytest.raises(DimensionMismatch):
        boundary_edges(np.zeros((2, 1)), PATH3)


def test_boundary_edges_of_planted_truth_are_inter_community():
    g, labels = planted_partition([50, 70, 80], 0.2, 0.05, seed=7)
    b = np.array([1.0, -1.0, 0.0])[labels]
    found = {tuple(e) for e in boundary_edges(b, g).tolist()}
    truth = {tuple(e) for e in g.edges[inter_community_edges(g, labels)].tolist()}
    assert found == truth


def test_cut_size_examples():
    assert cut_size([0, 0, 1], PATH3) == 1
    assert cut_size([2, 2, 2], K3) == 0
    assert cut_size([0, 1, 2], K3) == 3


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_cut_identity_against_dense_trace(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 101))
    g = random_connected_graph(n, float(rng.uniform(0.02, 0.3)), rng)
    labels = random_labels(n, int(rng.integers(1, n + 1)), rng)
    x = one_hot(labels)
    dense = float(np.trace(x.T @ g.laplacian_dense @ x))
    crossing = sum(labels[a] != labels[b] for a, b in g.edges)
    assert dense == 2 * crossing
    assert laplacian_trace(labels, g) == 2 * cut_size(labels, g) == 2 * crossing


# -- assignments and centroids ------------------------------------------------


def test_assignment_invariants(rng):
    labels = random_labels(30, 5, rng)
    x = one_hot(labels)
    np.testing.assert_array_equal(x.sum(axis=1), np.ones(30))
    np.testing.assert_array_equal(x.T @ x, np.diag(cluster_sizes(labels)))
    assert cluster_sizes(labels).sum() == 30


def test_compact_labels_first_occurrence():
    assert compact_labels([5, 5, 2, 7, 2]).tolist() == [0, 0, 1, 2, 1]


def test_centroid_examples():
    np.testing.assert_array_equal(centroid_closed_form([0, 0, 1], [[1.0], [1.0], [3.0]]), [[1.0], [3.0]])
    y = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(centroid_closed_form(np.arange(4), y), y)


def test_centroid_matches_least_squares(rng):
    for _ in range(20):
        y = rng.standard_normal((6, 2))
        labels = random_labels(6, 3, rng)
        x = one_hot(labels)
        mu_ls, *_ = np.linalg.lstsq(x, y, rcond=None)
        np.testing.assert_allclose(centroid_closed_form(labels, y), mu_ls, atol=1e-10)


def test_centroid_empty_cluster():
    with pytest.raises(EmptyCluster) as exc:
        centroid_closed_form([0, 0, 2], np.zeros((3, 1)), k=3)
    assert exc.value.cluster == 1


def test_labels_validated():
    with pytest.raises(LabelOutOfRange):
        objective_p1(np.zeros(3), [0, 1, 2], np.zeros((2, 1)), PATH3, 1.0)
    with pytest.raises(LabelOutOfRange):
        cut_size([0, -1, 0], PATH3)
    with pytest.raises(DimensionMismatch):
        cut_size([0, 0], PATH3)


# -- objectives -----------------------------------------------------------------


def test_p0_examples():
    y = np.full((3, 2), 4.0)
    assert objective_p0(y, y, K3, 7.0) == 0.0
    y = np.arange(3.0)
    assert objective_p0(y, y, K3, 0.5) == 0.5 * 3
    with pytest.raises(DimensionMismatch):
        objective_p0(np.zeros((3, 2)), np.zeros((3, 1)), K3, 1.0)


def test_p1_noiseless_truth_pays_only_the_cut():
    g, labels = planted_partition([50, 70, 80], 0.2, 0.05, seed=7)
    y = np.repeat(np.array([1.0, -1.0, 0.0])[labels][:, None], 10, axis=1)
    mu = centroid_closed_form(labels, y)
    lam = 0.37
    inter = int(inter_community_edges(g, labels).sum())
    assert objective_p1(y, labels, mu, g, lam) == pytest.approx(lam * inter, rel=1e-14)


def test_p1_single_cluster(rng):
    g = random_connected_graph(10, 0.3, rng)
    y = rng.standard_normal((10, 3))
    val = objective_p1(y, np.zeros(10, int), y.mean(axis=0, keepdims=True), g, 5.0)
    assert val == pytest.approx(0.5 * np.sum((y - y.mean(axis=0)) ** 2))


def test_q2_examples(rng):
    y = rng.standard_normal((7, 2))
    g = random_connected_graph(7, 0.4, rng)
    assert objective_q2(y, np.zeros(7, int), g, 3.0) == pytest.approx(7 * np.sum(y.mean(axis=0) ** 2))
    y3 = rng.standard_normal((3, 2))
    assert objective_q2(y3, [0, 1, 2], K3, 0.4) == pytest.approx(np.sum(y3**2) - 0.4 * 2 * 3)


def test_q2_matches_pseudo_inverse_form(rng):
    for _ in range(20):
        g, y, labels, lam = _instance(int(rng.integers(2**31)))
        x = one_hot(labels)
        direct = np.trace(y @ y.T @ x @ np.linalg.pinv(x)) - lam * np.trace(x.T @ g.laplacian_dense @ x)
        assert objective_q2(y, labels, g, lam) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_p0_equals_p1_with_distinct_centroids(seed):
    g, y, labels, lam = _instance(seed)
    k = labels.max() + 1
    mu = np.random.default_rng(seed).standard_normal((k, y.shape[1]))
    b = mu[labels]
    p0 = objective_p0(y, b, g, lam, tol=0)
    p1 = objective_p1(y, labels, mu, g, lam)
    assert abs(p0 - p1) <= 1e-12 * max(abs(p1), 1e-300)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_q_identity_and_stationary_centroids(seed):
    g, y, labels, lam = _instance(seed)
    mu = centroid_closed_form(labels, y)
    total = float(np.sum(y**2))
    lhs = 2 * objective_p1(y, labels, mu, g, lam) + objective_q2(y, labels, g, lam)
    assert abs(lhs - total) <= 1e-10 * max(total, 1e-300)
    x = one_hot(labels)
    assert np.max(np.abs(x.T @ (x @ mu - y))) <= 1e-10 * max(1.0, np.abs(y).max() * len(y))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_centroid_perturbation_never_helps(seed):
    g, y, labels, lam = _instance(seed)
    mu = centroid_closed_form(labels, y)
    base = objective_p1(y, labels, mu, g, lam)
    for idx in np.ndindex(mu.shape):
        for step in (1e-3, -1e-3):
            bumped = mu.copy()
            bumped[idx] += step
            assert objective_p1(y, labels, bumped, g, lam) >= base


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_boundary_is_subset_of_cut(seed):
    g, y, labels, _ = _instance(seed)
    rng = np.random.default_rng(seed)
    k = labels.max() + 1
    # centroids drawn from few values so adjacent clusters may coincide
    mu = rng.integers(0, 2, size=(k, 1)).astype(float)
    cut = {tuple(e) for e in g.edges[labels[g.edges[:, 0]] != labels[g.edges[:, 1]]].tolist()}
    bnd = {tuple(e) for e in boundary_edges(mu[labels], g).tolist()}
    assert bnd <= cut
    mu = rng.standard_normal((k, 2))
    assert {tuple(e) for e in boundary_edges(mu[labels], g).tolist()} == cut


def test_solution_reports_effective_penalty():
    g = build_graph(3, [(0, 1), (1, 2)])
    y = np.array([0.0, 1.0, 0.0])
    sol = make_solution(y, [0, 1, 2], g, 2.0)
    assert sol.k == 3 and sol.cut_size == 2 and sol.l20 == 2
    # clusters 0 and 2 share a mean but are not adjacent: P0 equals P1
    assert sol.p0_objective == sol.objective == pytest.approx(4.0)
    sol = make_solution([0.0, 0.0, 0.0], [0, 1, 1], g, 2.0)
    assert sol.cut_size == 1 and sol.l20 == 0
    assert sol.p0_objective == 0.0 and sol.objective == 2.0


def test_solution_json_shape():
    sol = make_solution([1.0, 1.0, 3.0], [4, 4, 9], PATH3, 1.0)
    data = json.loads(json.dumps(sol.to_json()))
    assert data == {"k": 2, "labels": [0, 0, 1], "mu": [[1.0], [3.0]], "objective": 1.0, "cut_size": 1, "l20": 1}
    np.testing.assert_array_equal(sol.reconstruction, [[1.0], [1.0], [3.0]])
