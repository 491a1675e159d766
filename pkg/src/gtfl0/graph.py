"""Simple undirected graphs, Laplacians, and the graph generators used by
the experiments (planted partition and k-nearest-neighbour graphs).

Node indices are 0-based throughout.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateFeatures,
    DisconnectedGraph,
    IndexOutOfRange,
    ProbabilityOutOfRange,
    SelfLoop,
)

#: Above this node count solvers switch to the sparse Laplacian.
DENSE_THRESHOLD = 2000


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple unweighted undirected graph.

    ``edges`` is an ``(m, 2)`` integer array with ``edges[:, 0] < edges[:, 1]``,
    sorted lexicographically.  ``meta`` carries generator bookkeeping such as
    the number of connectivity-repair edges.
    """

    n: int
    edges: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * self.m, dtype=np.int64)
        a = sp.coo_matrix(
            (data, (np.r_[i, j], np.r_[j, i])), shape=(self.n, self.n)
        )
        return a.tocsr()

    @cached_property
    def laplacian_sparse(self) -> sp.csr_matrix:
        return (sp.diags(self.degrees) - self.adjacency).tocsr()

    @cached_property
    def laplacian_dense(self) -> np.ndarray:
        lap = np.zeros((self.n, self.n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        lap[i, j] = -1.0
        lap[j, i] = -1.0
        lap[np.arange(self.n), np.arange(self.n)] = self.degrees
        return lap

    def laplacian(self, dense: bool | None = None):
        """Return ``L = D - A``; dense by default when ``n <= DENSE_THRESHOLD``."""
        if dense is None:
            dense = self.n <= DENSE_THRESHOLD
        return self.laplacian_dense if dense else self.laplacian_sparse

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style ``(indptr, indices)`` neighbour lists."""
        a = self.adjacency
        return a.indptr.astype(np.int64), a.indices.astype(np.int64)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}


def _normalize_edges(n: int, edge_list: Iterable) -> np.ndarray:
    arr = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2).astype(np.int64)
    if arr.min() < 0 or arr.max() >= n:
        raise IndexOutOfRange(f"edge endpoint outside [0, {n})")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise SelfLoop(f"self-loop at node {int(arr[loops][0, 0])}")
    arr = np.sort(arr, axis=1)
    return np.unique(arr, axis=0)


def components(g: Graph) -> np.ndarray:
    """Connected-component label per node, numbered in order of first node."""
    indptr, indices = g.neighbors
    labels = np.full(g.n, -1, dtype=np.int64)
    current = 0
    for start in range(g.n):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(v)
        current += 1
    return labels


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or components(g).max() == 0


def build_graph(n: int, edge_list, require_connected: bool = True) -> Graph:
    """Build a :class:`Graph` from an edge list.

    Duplicate pairs (in either orientation) are collapsed.  Self-loops and
    out-of-range indices raise.  With ``require_connected`` (the default) a
    disconnected result raises :class:`DisconnectedGraph`.
    """
    if n < 1:
        raise IndexOutOfRange("graph needs at least one node")
    g = Graph(int(n), _normalize_edges(n, edge_list))
    if require_connected:
        labels = components(g)
        if labels.max() > 0:
            raise DisconnectedGraph(int(labels.max()) + 1)
    return g


def repair_connectivity(
    n: int, edges: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Join components by adding a uniformly random edge between the two
    largest components until the graph is connected.

    Returns the new edge array and the number of edges added.
    """
    added = 0
    while True:
        g = Graph(n, edges)
        labels = components(g)
        n_comp = labels.max() + 1
        if n_comp <= 1:
            return edges, added
        sizes = np.bincount(labels)
        # stable: ties between equal sizes go to the lower component id
        order = np.argsort(-sizes, kind="stable")
        a = rng.choice(np.flatnonzero(labels == order[0]))
        b = rng.choice(np.flatnonzero(labels == order[1]))
        edges = _normalize_edges(n, np.vstack([edges, [[a, b]]]))
        added += 1


def planted_partition(sizes, p: float, q: float, seed=None) -> tuple[Graph, np.ndarray]:
    """Sample a planted-partition graph.

    Each pair inside a community is joined with probability ``p`` and each
    pair across communities with probability ``q``.  A disconnected sample is
    repaired with :func:`repair_connectivity`; the count is stored in
    ``graph.meta["repair_edges"]``.

    Returns the graph and the 0-based community label of every node.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("sizes must be a nonempty list of positive integers")
    if not (0.0 <= q <= p <= 1.0):
        raise ProbabilityOutOfRange(f"need 0 <= q <= p <= 1, got p={p}, q={q}")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p, q)
    keep = rng.random(iu.size) < prob
    edges = np.column_stack([iu[keep], ju[keep]]).astype(np.int64)
    edges, added = repair_connectivity(n, edges, rng)
    g = Graph(n, edges, meta={"repair_edges": added, "sizes": sizes, "p": p, "q": q})
    return g, labels


def knn_graph(features, k: int, seed=None) -> Graph:
    """Symmetrised k-nearest-neighbour graph under Euclidean distance.

    ``(i, j)`` is an edge when ``j`` is among the ``k`` nearest points of
    ``i`` or vice versa.  Distance ties go to the smaller node index.  If the
    union graph is disconnected it is repaired (see :func:`repair_connectivity`)
    using ``seed``.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if k < 1 or n <= k:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    sq = np.einsum("ij,ij->i", x, x)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * x @ x.T, 0.0)
    if np.all(d2 <= 1e-300):
        raise DegenerateFeatures("all pairwise distances are zero")
    np.fill_diagonal(d2, np.inf)
    # stable sort keeps the lower index first among equal distances
    nbrs = np.argsort(d2, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    edges = _normalize_edges(n, np.column_stack([rows, nbrs.ravel()]))
    edges, added = repair_connectivity(n, edges, np.random.default_rng(seed))
    return Graph(n, edges, meta={"repair_edges": added, "k": k})


def read_edge_list(path, n: int | None = None, repair: bool = False, seed=None) -> Graph:
    """Read a whitespace-separated 0-based edge list.

    Lines starting with ``#`` and blank lines are skipped.  ``n`` defaults to
    one more than the largest index.  A disconnected graph raises
    :class:`DisconnectedGraph` unless ``repair`` is set.
    """
    pairs = []
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        a, b = s.split()[:2]
        pairs.append((int(a), int(b)))
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(arr.max()) + 1 if arr.size else 1
    g = build_graph(n, arr, require_connected=False)
    if is_connected(g):
        return g
    if not repair:
        raise DisconnectedGraph(int(components(g).max()) + 1)
    edges, added = repair_connectivity(n, g.edges, np.random.default_rng(seed))
    return Graph(n, edges, meta={"repair_edges": added})


def write_edge_list(g: Graph, path) -> None:
    lines = [f"# n={g.n} m={g.m}"] + [f"{a} {b}" for a, b in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def inter_community_edges(g: Graph, labels) -> np.ndarray:
    """Boolean mask over ``g.edges`` of edges joining different labels."""
    labels = np.asarray(labels)
    return labels[g.edges[:, 0]] != labels[g.edges[:, 1]]
