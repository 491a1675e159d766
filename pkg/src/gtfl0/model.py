"""The l2,0-penalised first-order graph trend filtering objective.

A piecewise-constant estimate ``B`` on a graph is described equivalently by
a node labelling (cluster assignment) and one centroid row per cluster,
``B = X @ mu``.  For such ``B`` the count of edges whose endpoint rows
differ is the cut size of the labelling, ``cut = Tr(X^T L X) / 2``.

Labels are 0-based integer arrays; the one-hot matrix ``X`` is only formed
when a caller asks for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyCluster, LabelOutOfRange
from .graph import Graph


def as_signal(y) -> np.ndarray:
    """Coerce observations to a finite ``(n, d)`` float array."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise DimensionMismatch(f"signal must be 1-D or 2-D, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("signal has non-finite entries")
    return y


def _check_rows(a: np.ndarray, g: Graph, what: str) -> None:
    if a.shape[0] != g.n:
        raise DimensionMismatch(f"{what} has {a.shape[0]} rows, graph has {g.n} nodes")


def _check_labels(labels, n: int | None = None, k: int | None = None) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
        labels = labels.astype(np.int64)
    if n is not None and labels.size != n:
        raise DimensionMismatch(f"{labels.size} labels for {n} nodes")
    if labels.size and labels.min() < 0:
        raise LabelOutOfRange("labels must be nonnegative")
    if k is not None and labels.size and labels.max() >= k:
        raise LabelOutOfRange(f"label {labels.max()} outside [0, {k})")
    return labels.astype(np.int64, copy=False)


def compact_labels(labels) -> np.ndarray:
    """Renumber labels to ``0..k-1`` in order of first occurrence."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inv.ravel()]


def one_hot(labels, k: int | None = None) -> np.ndarray:
    labels = _check_labels(labels)
    k = int(labels.max()) + 1 if k is None else k
    x = np.zeros((labels.size, k))
    x[np.arange(labels.size), labels] = 1.0
    return x


def cluster_sizes(labels, k: int | None = None) -> np.ndarray:
    labels = _check_labels(labels)
    return np.bincount(labels, minlength=k or 0)


def default_tol(b) -> float:
    """Tolerance for counting differing rows of an arbitrary user ``B``."""
    b = as_signal(b)
    return 1e-9 * float(np.max(np.linalg.norm(b, axis=1), initial=0.0))


def _edge_jumps(b: np.ndarray, g: Graph) -> np.ndarray:
    return np.linalg.norm(b[g.edges[:, 0]] - b[g.edges[:, 1]], axis=1)


def l20_penalty(b, g: Graph, tol: float = 0.0) -> int:
    """Number of edges whose endpoint rows of ``B`` differ by more than ``tol``."""
    b = as_signal(b)
    _check_rows(b, g, "B")
    return int(np.count_nonzero(_edge_jumps(b, g) > tol))


def boundary_edges(b, g: Graph, tol: float = 0.0) -> np.ndarray:
    """The edges counted by :func:`l20_penalty`, as an ``(m', 2)`` array."""
    b = as_signal(b)
    _check_rows(b, g, "B")
    return g.edges[_edge_jumps(b, g) > tol]


def cut_mask(labels, g: Graph) -> np.ndarray:
    labels = _check_labels(labels, g.n)
    return labels[g.edges[:, 0]] != labels[g.edges[:, 1]]


def cut_size(labels, g: Graph) -> int:
    """Count of edges whose endpoints carry different labels."""
    return int(np.count_nonzero(cut_mask(labels, g)))


def laplacian_trace(labels, g: Graph) -> int:
    """``Tr(X^T L X)`` evaluated with integer sparse arithmetic."""
    labels = _check_labels(labels, g.n)
    k = int(labels.max()) + 1
    x = sp.csr_matrix(
        (np.ones(g.n, dtype=np.int64), (np.arange(g.n), labels)), shape=(g.n, k)
    )
    lap = sp.diags(g.degrees).astype(np.int64) - g.adjacency
    return int((x.T @ (lap @ x)).diagonal().sum())


def centroid_closed_form(labels, y, k: int | None = None) -> np.ndarray:
    """Cluster means of the rows of ``Y``, i.e. ``(X^T X)^{-1} X^T Y``.

    Raises :class:`EmptyCluster` if any of the ``k`` clusters has no member.
    """
    y = as_signal(y)
    labels = _check_labels(labels, y.shape[0], k)
    k = int(labels.max()) + 1 if k is None else k
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyCluster(int(empty[0]))
    sums = np.zeros((k, y.shape[1]))
    np.add.at(sums, labels, y)
    return sums / counts[:, None]


def objective_p0(y, b, g: Graph, lam: float, tol: float = 0.0) -> float:
    """``0.5 * ||Y - B||_F^2 + lam * l20_penalty(B)``."""
    y, b = as_signal(y), as_signal(b)
    _check_rows(y, g, "Y")
    if b.shape != y.shape:
        raise DimensionMismatch(f"B shape {b.shape} != Y shape {y.shape}")
    return 0.5 * float(np.sum((y - b) ** 2)) + lam * l20_penalty(b, g, tol)


def objective_p1(y, labels, mu, g: Graph, lam: float) -> float:
    """``0.5 * ||Y - X mu||_F^2 + (lam / 2) * Tr(X^T L X)``.

    The trace equals twice the cut size, so the penalty is ``lam * cut``.
    """
    y = as_signal(y)
    _check_rows(y, g, "Y")
    mu = np.asarray(mu, dtype=float).reshape(-1, y.shape[1])
    labels = _check_labels(labels, g.n, mu.shape[0])
    fid = float(np.sum((y - mu[labels]) ** 2))
    return 0.5 * fid + 0.5 * lam * (2 * cut_size(labels, g))


def objective_q2(y, labels, g: Graph, lam: float) -> float:
    """``Tr(Y Y^T X X^+) - lam * Tr(X^T L X)`` via cluster means.

    The first term is ``sum_c |C_c| * ||mean_c||^2``; ``Y Y^T`` is never formed.
    """
    y = as_signal(y)
    _check_rows(y, g, "Y")
    labels = _check_labels(labels, g.n)
    mu = centroid_closed_form(labels, y)
    counts = np.bincount(labels)
    return float(counts @ np.sum(mu**2, axis=1)) - lam * 2 * cut_size(labels, g)


@dataclass
class GtfSolution:
    """A piecewise-constant estimate ``B = X mu`` with its P1 objective."""

    labels: np.ndarray
    mu: np.ndarray
    objective: float
    cut_size: int
    lam: float
    #: boundary count measured on B; below cut_size when adjacent clusters share a centroid
    l20: int = -1
    info: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.mu.shape[0]

    @property
    def reconstruction(self) -> np.ndarray:
        return self.mu[self.labels]

    @property
    def p0_objective(self) -> float:
        """P0 value of the reconstruction, using the boundary count of ``B``."""
        return self.objective - self.lam * (self.cut_size - self.l20)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "labels": self.labels.tolist(),
            "mu": self.mu.tolist(),
            "objective": self.objective,
            "cut_size": self.cut_size,
            "l20": self.l20,
        }


def make_solution(y, labels, g: Graph, lam: float, **info) -> GtfSolution:
    """Collapse empty clusters, refit centroids, and score with P1."""
    y = as_signal(y)
    labels = compact_labels(_check_labels(labels, g.n))
    mu = centroid_closed_form(labels, y)
    return GtfSolution(
        labels=labels,
        mu=mu,
        objective=objective_p1(y, labels, mu, g, lam),
        cut_size=cut_size(labels, g),
        lam=lam,
        l20=l20_penalty(mu[labels], g),
        info=info,
    )
