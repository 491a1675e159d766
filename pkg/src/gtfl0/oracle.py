"""Exhaustive ground truth for tiny instances.

Every set partition of ``n`` nodes is visited once as a restricted-growth
string (``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``), which is already a
canonical 0-based labelling.
"""
from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

from .errors import TooLarge
from .graph import Graph
from .model import GtfSolution, as_signal, make_solution
from .ssl import MapInstance, MapSolution, closed_form_b, make_map_solution, restricted_fit

MAX_N = 12


def bell_number(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_partitions(n: int) -> Iterator[np.ndarray]:
    """Yield every set partition of ``range(n)`` as a label array."""
    if n > MAX_N:
        raise TooLarge(f"n={n} exceeds enumeration cap {MAX_N}")
    if n < 1:
        return
    a = [0] * n
    b = [0] * n  # b[i] = max(a[:i]), kept alongside to make each step O(1) amortised
    while True:
        yield np.array(a, dtype=np.int64)
        i = n - 1
        while i > 0 and a[i] == b[i] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        top = max(b[i], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = top


def _stats_p1(y: np.ndarray, labels: np.ndarray, g: Graph, lam: float) -> float:
    k = labels.max() + 1
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, y.shape[1]))
    np.add.at(sums, labels, y)
    fid = float(np.sum(y * y) - np.sum(np.sum(sums**2, axis=1) / counts))
    cut = int(np.count_nonzero(labels[g.edges[:, 0]] != labels[g.edges[:, 1]]))
    return 0.5 * fid + lam * cut


def brute_force_p1(y, g: Graph, lam: float) -> GtfSolution:
    """Global minimiser of P1 over all partitions (ties: first in RGS order)."""
    y = as_signal(y)
    if g.n > MAX_N:
        raise TooLarge(f"n={g.n} exceeds enumeration cap {MAX_N}")
    best, best_val = None, np.inf
    for labels in enumerate_partitions(g.n):
        val = _stats_p1(y, labels, g, lam)
        if val < best_val - 1e-12:
            best, best_val = labels, val
    return make_solution(y, best, g, lam)


def brute_force_q1(inst: MapInstance) -> MapSolution:
    """Global minimiser of Q1 over all partitions with a solvable refit."""
    g = inst.graph
    if g.n > MAX_N:
        raise TooLarge(f"n={g.n} exceeds enumeration cap {MAX_N}")
    best, best_val = None, np.inf
    for labels in enumerate_partitions(g.n):
        w = np.bincount(labels, inst.mask + 2 * inst.eps)
        if np.any(w <= 0):
            continue
        bt = closed_form_b(labels, inst)
        cut = np.count_nonzero(labels[g.edges[:, 0]] != labels[g.edges[:, 1]])
        val = restricted_fit(labels, bt, inst) + 2 * inst.lam * cut
        if val < best_val - 1e-12:
            best, best_val = labels, val
    return make_map_solution(best, inst)


def numeric_gradient(f: Callable[[np.ndarray], float], at, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of an array.

    The step for each entry is ``h * max(1, |x|)``.
    """
    x = np.array(at, dtype=float)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        step = h * max(1.0, abs(orig))
        flat[idx] = orig + step
        fp = f(x)
        flat[idx] = orig - step
        fm = f(x)
        flat[idx] = orig
        gflat[idx] = (fp - fm) / (2 * step)
    return grad
