"""Spectral approximation for the fixed-k problem and screening over k.

The cluster objective ``q(X) = Tr(Y Y^T X X^+) - lam * Tr(X^T L X)`` is
rewritten through the eigenpairs of ``Y Y^T`` (largest) and ``L``
(smallest).  Keeping the leading ``k`` pairs of each turns maximising
``q`` into a vector partition problem on the points

    z_i = [w_i * r_i, sqrt(lam) * t_i],
    r_i(j) = sqrt(sigma_j) U_ij,   t_i(j) = sqrt(alpha - gamma_j) V_ij,

which is handed to k-means.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, DimensionMismatch, KEqualsN, NonSymmetric, TooFewPoints
from .graph import Graph
from .rng import seed_sequence
from .model import GtfSolution, as_signal, compact_labels, make_solution


@dataclass
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray
    which: str

    @property
    def count(self) -> int:
        return self.values.size


def _fix_signs(vectors: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Flip columns so the first entry above ``atol`` in magnitude is positive."""
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.flatnonzero(np.abs(col) > atol)
        if nz.size and col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def top_eigenpairs(s, k: int, which: str = "largest") -> EigenPairs:
    """Top-``k`` eigenpairs of a symmetric matrix.

    ``which="largest"`` returns eigenvalues in descending order and
    ``"smallest"`` in ascending order.  Dense input uses LAPACK (``eigh`` with
    an index subset); sparse input uses ARPACK.  Every eigenvector is signed
    so that its first nonzero component is positive.
    """
    if which not in ("largest", "smallest"):
        raise ValueError(f"which must be 'largest' or 'smallest', got {which!r}")
    n = s.shape[0]
    if s.shape != (n, n):
        raise NonSymmetric(f"matrix is not square: {s.shape}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")

    if sp.issparse(s) and k < n - 1:
        s = s.asfptype() if hasattr(s, "asfptype") else s.astype(float)
        asym = abs(s - s.T).max() if s.nnz else 0.0
        if asym > 1e-10:
            raise NonSymmetric(f"asymmetry {asym:.3g} exceeds 1e-10")
        s = (s + s.T) * 0.5
        try:
            vals, vecs = spla.eigsh(s, k=k, which="LA" if which == "largest" else "SA")
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
    else:
        s = s.toarray() if sp.issparse(s) else np.asarray(s, dtype=float)
        asym = np.max(np.abs(s - s.T)) if n else 0.0
        if asym > 1e-10:
            raise NonSymmetric(f"asymmetry {asym:.3g} exceeds 1e-10")
        s = (s + s.T) * 0.5
        lo, hi = (n - k, n - 1) if which == "largest" else (0, k - 1)
        vals, vecs = sla.eigh(s, subset_by_index=[lo, hi])

    order = np.argsort(-vals if which == "largest" else vals, kind="stable")
    return EigenPairs(vals[order], _fix_signs(vecs[:, order]), which)


def gram_top_eigenpairs(y, k: int) -> EigenPairs:
    """Largest ``k`` eigenpairs of ``Y Y^T`` through the ``d x d`` Gram matrix.

    ``Y Y^T`` has rank at most ``d``; directions beyond the rank (or beyond
    ``d``) come back with eigenvalue 0 and a zero vector, which is all the
    embedding needs since they are scaled by ``sqrt(sigma) = 0``.
    """
    y = as_signal(y)
    n, d = y.shape
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if d >= n:
        ep = top_eigenpairs(y @ y.T, k, "largest")
        vals = np.clip(ep.values, 0.0, None)
        return EigenPairs(vals, ep.vectors, "largest")
    gram = y.T @ y
    m = min(k, d)
    ep = top_eigenpairs(gram, m, "largest")
    vals = np.zeros(k)
    vecs = np.zeros((n, k))
    scale = max(float(ep.values[0]) if m else 0.0, 1.0)
    for j in range(m):
        sig = float(ep.values[j])
        if sig > 1e-12 * scale:
            vals[j] = sig
            vecs[:, j] = y @ ep.vectors[:, j] / np.sqrt(sig)
    return EigenPairs(vals, _fix_signs(vecs), "largest")


def optimal_alpha(trace_l: float, gamma_smallest_k, n: int, k: int) -> float:
    """Mean of the ``n - k`` eigenvalues of ``L`` not kept in the embedding.

    Uses ``Tr(L) = sum of degrees`` so the full spectrum is not needed.  This
    is the minimiser over ``alpha`` of ``sum_{i>k} (gamma_i - alpha)^2``.
    """
    if k >= n:
        raise KEqualsN(f"k={k} leaves no eigenvalues to average (n={n})")
    gam = np.asarray(gamma_smallest_k, dtype=float)[:k]
    return (float(trace_l) - float(gam.sum())) / (n - k)


@dataclass
class SpectralEmbedding:
    r: np.ndarray
    t: np.ndarray
    alpha: float
    z: np.ndarray
    lam: float


class _Spectra:
    """Eigenpairs of ``Y Y^T`` and ``L`` computed once up to ``k_max``."""

    def __init__(self, y, g: Graph, k_max: int):
        self.y = as_signal(y)
        self.g = g
        self.k_max = k_max
        self.sig = gram_top_eigenpairs(self.y, k_max)
        self.lap = top_eigenpairs(g.laplacian(), k_max, "smallest")

    def embedding(self, lam: float, k: int, weights=None, alpha=None) -> SpectralEmbedding:
        n = self.g.n
        sigma = self.sig.values[:k]
        gamma = self.lap.values[:k]
        if alpha is None:
            if k < n:
                alpha = optimal_alpha(self.g.degrees.sum(), gamma, n, k)
            else:
                alpha = float(gamma[-1])
        if alpha < gamma[-1]:
            alpha = float(gamma[-1]) + 1e-9
        r = self.sig.vectors[:, :k] * np.sqrt(np.clip(sigma, 0.0, None))
        t = self.lap.vectors[:, :k] * np.sqrt(np.clip(alpha - gamma, 0.0, None))
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        z = np.hstack([w[:, None] * r, np.sqrt(lam) * t])
        return SpectralEmbedding(r=r, t=t, alpha=float(alpha), z=z, lam=lam)


def build_embedding(y, g: Graph, lam: float, k: int, weights=None, alpha=None) -> SpectralEmbedding:
    """Spectral vectors ``r``, ``t`` and the k-means input ``z`` for one ``k``.

    ``alpha`` defaults to :func:`optimal_alpha` (or the largest kept Laplacian
    eigenvalue when ``k == n``) and is clamped to at least ``gamma_k``.
    """
    return _Spectra(y, g, k).embedding(lam, k, weights, alpha)


def vpp_objective(emb: SpectralEmbedding, labels) -> float:
    """``sum_h ||xi_h||^2 + ||zeta_h||^2 - lam * alpha * n`` for a labelling,
    with ``xi_h`` the size-normalised sum of ``r`` over cluster ``h`` and
    ``zeta_h`` the ``sqrt(lam)``-scaled sum of ``t``."""
    labels = compact_labels(labels)
    k = labels.max() + 1
    counts = np.bincount(labels, minlength=k)
    rs = np.zeros((k, emb.r.shape[1]))
    ts = np.zeros((k, emb.t.shape[1]))
    np.add.at(rs, labels, emb.r)
    np.add.at(ts, labels, emb.t)
    xi = np.sum(rs**2, axis=1) / counts
    zeta = emb.lam * np.sum(ts**2, axis=1)
    return float(xi.sum() + zeta.sum() - emb.lam * emb.alpha * labels.size)


def _sqdist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    idx = [int(rng.integers(m))]
    closest = _sqdist(points, points[idx]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            nxt = int(rng.integers(m))
        else:
            nxt = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            nxt = min(nxt, m - 1)
        idx.append(nxt)
        closest = np.minimum(closest, _sqdist(points, points[[nxt]]).ravel())
    return points[idx].copy()


def _lloyd(points, centers, max_iter):
    k = centers.shape[0]
    labels = None
    for _ in range(max_iter):
        d2 = _sqdist(points, centers)
        new = np.argmin(d2, axis=1)
        counts = np.bincount(new, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # reseed to the point farthest from its own centre
            far = int(np.argmax(d2[np.arange(len(new)), new]))
            new[far] = c
            d2[far, :] = 0.0
            counts = np.bincount(new, minlength=k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        centers = sums / np.maximum(counts, 1)[:, None]
    d2 = _sqdist(points, centers)
    inertia = float(d2[np.arange(len(labels)), labels].sum())
    return labels, centers, inertia


def kmeans(points, k: int, restarts: int = 10, max_iter: int = 300, seed=None):
    """Lloyd's algorithm from k-means++ seeding, best of ``restarts`` runs.

    Returns ``(labels, centers, inertia)``.  Clusters that empty out are
    reseeded with the point farthest from its current centre.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    m = pts.shape[0]
    if k < 1 or m < k:
        raise TooFewPoints(f"need 1 <= k <= m, got k={k}, m={m}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        result = _lloyd(pts, _kmeanspp(pts, k, rng), max_iter)
        if best is None or result[2] < best[2]:
            best = result
    return best


def _solve_fixed_k(spec: _Spectra, lam, k, restarts, max_iter, reweight_passes, seed):
    rng = np.random.default_rng(seed)
    weights = None
    best = None
    for _ in range(1 + max(0, reweight_passes)):
        emb = spec.embedding(lam, k, weights)
        labels, _, _ = kmeans(emb.z, k, restarts, max_iter, rng)
        sol = make_solution(spec.y, labels, spec.g, lam, requested_k=k)
        if best is None or sol.objective < best.objective:
            best = sol
        counts = np.bincount(labels, minlength=k)
        weights = 1.0 / np.sqrt(counts[labels])
    return best


def solve_p2_fixed_k(
    y,
    g: Graph,
    lam: float,
    k: int,
    restarts: int = 10,
    max_iter: int = 300,
    reweight_passes: int = 1,
    seed=None,
) -> GtfSolution:
    """Spectral solution for a fixed number of clusters.

    The first k-means pass uses unit weights on the ``r`` block; each
    reweighting pass sets ``w_i = 1 / sqrt(|C(i)|)`` from the previous
    clustering and reruns k-means.  The pass with the lowest P1 objective is
    returned (empty clusters collapsed, so ``solution.k <= k``).
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    y = as_signal(y)
    if y.shape[0] != g.n:
        raise DimensionMismatch("Y rows do not match graph size")
    spec = _Spectra(y, g, k)
    return _solve_fixed_k(spec, lam, k, restarts, max_iter, reweight_passes, seed)


def solve_p2_screen(
    y,
    g: Graph,
    lam: float,
    k_max: int,
    restarts: int = 10,
    max_iter: int = 300,
    reweight_passes: int = 1,
    seed=None,
) -> GtfSolution:
    """Run the fixed-k solver for ``k = 1..k_max`` and keep the best.

    Candidates are ranked by the P1 objective (lower is better), which is
    the same ordering as ranking by ``q`` from high to low.  The per-k table
    is returned in ``solution.info["per_k"]``.
    """
    y = as_signal(y)
    if y.shape[0] != g.n:
        raise DimensionMismatch("Y rows do not match graph size")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    k_max = min(k_max, g.n)
    spec = _Spectra(y, g, k_max)
    seeds = seed_sequence(seed).spawn(k_max)
    table = []
    best = None
    for k in range(1, k_max + 1):
        sol = _solve_fixed_k(spec, lam, k, restarts, max_iter, reweight_passes, seeds[k - 1])
        table.append({"k": k, "effective_k": sol.k, "objective": sol.objective, "cut_size": sol.cut_size})
        if best is None or sol.objective < best.objective:
            best = sol
    best.info = {"per_k": table, "k_star": best.k}
    return best


def solve_p2_path(
    y,
    g: Graph,
    lams,
    k_max: int,
    restarts: int = 10,
    max_iter: int = 300,
    reweight_passes: int = 1,
    seed=None,
) -> list[GtfSolution]:
    """:func:`solve_p2_screen` over a sequence of ``lam`` values, sharing the
    eigendecompositions (they do not depend on ``lam``)."""
    y = as_signal(y)
    if y.shape[0] != g.n:
        raise DimensionMismatch("Y rows do not match graph size")
    k_max = min(k_max, g.n)
    spec = _Spectra(y, g, k_max)
    out = []
    for lam, ss in zip(lams, seed_sequence(seed).spawn(len(lams))):
        seeds = ss.spawn(k_max)
        best = None
        for k in range(1, k_max + 1):
            sol = _solve_fixed_k(spec, float(lam), k, restarts, max_iter, reweight_passes, seeds[k - 1])
            if best is None or sol.objective < best.objective:
                best = sol
        best.info = {"k_star": best.k}
        out.append(best)
    return out
