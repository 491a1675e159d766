"""Semi-supervised labelling with an l2,0 graph penalty (modified absorption).

Given one-hot labels ``Y`` observed on the rows selected by the mask ``M``,
a prior ``R`` and a graph, the estimate ``B`` minimises

    Q(B) = 0.5 * ||M (Y - B)||_F^2 + lam * l20(B) + eps * ||R - B||_F^2.

Restricting ``B = X Bt`` to a node partition ``X`` gives

    Q1(X) = 0.5 * ||M (Y - X Bt)||^2 + lam * Tr(X^T L X) + eps * ||R - X Bt||^2

with ``Bt`` the per-cluster minimiser of the two quadratic terms.  Note the
cut coefficient: ``Tr(X^T L X)`` is twice the cut size, so ``Q1`` charges
``2 * lam`` per cut edge where ``Q`` charges ``lam`` per boundary edge.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annealing import SAState, Schedule, run_anneal
from .errors import DimensionMismatch, SingularSystem
from .graph import Graph
from .rng import seed_sequence
from .model import compact_labels, cut_size, l20_penalty, _check_labels
from .spectral import _Spectra, _solve_fixed_k


@dataclass
class MapInstance:
    y_onehot: np.ndarray
    mask: np.ndarray
    prior: np.ndarray
    lam: float
    eps: float
    graph: Graph

    def __post_init__(self):
        self.y_onehot = np.asarray(self.y_onehot, dtype=float)
        self.mask = np.asarray(self.mask, dtype=float).ravel()
        self.prior = np.asarray(self.prior, dtype=float)
        n, n_classes = self.y_onehot.shape
        if self.mask.size != n or self.prior.shape != (n, n_classes) or self.graph.n != n:
            raise DimensionMismatch("Y, mask, prior and graph sizes disagree")
        if n_classes < 2:
            raise ValueError("need at least two classes")
        if np.any(self.prior < 0):
            raise ValueError("prior entries must be nonnegative")
        seen = self.mask > 0
        if not np.all(np.isin(self.mask, (0.0, 1.0))):
            raise ValueError("mask must be 0/1")
        if not np.allclose(self.y_onehot[seen].sum(axis=1), 1.0) or np.any(self.y_onehot[~seen]):
            raise ValueError("observed rows must be one-hot and unobserved rows zero")

    @property
    def n_classes(self) -> int:
        return self.y_onehot.shape[1]

    @classmethod
    def from_labels(cls, labels, graph: Graph, lam: float, eps: float = 0.01,
                    n_classes: int | None = None, prior=None) -> "MapInstance":
        """Build an instance from a class vector with ``-1`` for unlabelled nodes.

        The prior defaults to the uniform ``1 / K`` in every entry.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if n_classes is None:
            n_classes = int(labels.max()) + 1
        seen = labels >= 0
        y = np.zeros((labels.size, n_classes))
        y[np.flatnonzero(seen), labels[seen]] = 1.0
        if prior is None:
            prior = np.full((labels.size, n_classes), 1.0 / n_classes)
        return cls(y, seen.astype(float), prior, lam, eps, graph)


@dataclass
class MapSolution:
    labels: np.ndarray
    b_tilde: np.ndarray
    q1_objective: float
    predicted: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.b_tilde.shape[0]

    @property
    def b_full(self) -> np.ndarray:
        return self.b_tilde[self.labels]

    def to_json(self) -> dict:
        return {
            "predicted": self.predicted.tolist(),
            "k": self.k,
            "q1_objective": self.q1_objective,
            "per_class_counts": np.bincount(self.predicted, minlength=self.b_tilde.shape[1]).tolist(),
        }


def predict(b_full) -> np.ndarray:
    """Row-wise argmax; ties go to the smallest class index."""
    return np.argmax(np.asarray(b_full, dtype=float), axis=1)


def closed_form_b(labels, inst: MapInstance, literal: bool = False) -> np.ndarray:
    """Per-cluster class scores minimising the quadratic part of ``Q``.

    Solves ``(X^T M X + 2 eps X^T X) Bt = X^T M Y + 2 eps X^T R``, which is
    diagonal because ``X`` is an assignment matrix.  With ``literal=True``
    the system ``(X^T (M + I) X) Bt = X^T M Y + eps X^T R`` is solved instead;
    it is kept only for comparison since it is not stationary for ``Q``
    (at ``X = I, M = I, eps = 0`` it gives ``Y / 2`` rather than ``Y``).
    """
    labels = _check_labels(labels, inst.graph.n)
    k = int(labels.max()) + 1
    m = inst.mask
    if literal:
        w = m + 1.0
        rhs_rows = m[:, None] * inst.y_onehot + inst.eps * inst.prior
    else:
        w = m + 2.0 * inst.eps
        rhs_rows = m[:, None] * inst.y_onehot + 2.0 * inst.eps * inst.prior
    diag = np.bincount(labels, w, minlength=k)
    rhs = np.zeros((k, inst.n_classes))
    np.add.at(rhs, labels, rhs_rows)
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        raise SingularSystem(f"cluster {int(bad[0])} has no observed label and eps = 0")
    return rhs / diag[:, None]


def objective_q(b, inst: MapInstance, tol: float = 0.0) -> float:
    b = np.asarray(b, dtype=float)
    if b.shape != inst.y_onehot.shape:
        raise DimensionMismatch(f"B shape {b.shape} != {inst.y_onehot.shape}")
    fit = 0.5 * float(np.sum(inst.mask[:, None] * (inst.y_onehot - b) ** 2))
    prior = inst.eps * float(np.sum((inst.prior - b) ** 2))
    return fit + inst.lam * l20_penalty(b, inst.graph, tol) + prior


def restricted_fit(labels, b_tilde, inst: MapInstance) -> float:
    """The quadratic part of ``Q`` at ``B = X Bt``."""
    b = np.asarray(b_tilde)[labels]
    return 0.5 * float(np.sum(inst.mask[:, None] * (inst.y_onehot - b) ** 2)) + inst.eps * float(
        np.sum((inst.prior - b) ** 2)
    )


def objective_q1(labels, inst: MapInstance) -> float:
    labels = _check_labels(labels, inst.graph.n)
    bt = closed_form_b(labels, inst)
    return restricted_fit(labels, bt, inst) + inst.lam * 2 * cut_size(labels, inst.graph)


def literal_divergence(labels, inst: MapInstance) -> dict:
    """Compare the stationary ``Bt`` with the literal-formula ``Bt``."""
    ours = closed_form_b(labels, inst)
    lit = closed_form_b(labels, inst, literal=True)
    return {
        "max_abs_diff": float(np.max(np.abs(ours - lit))),
        "restricted_fit": restricted_fit(labels, ours, inst),
        "restricted_fit_literal": restricted_fit(labels, lit, inst),
    }


def make_map_solution(labels, inst: MapInstance, **info) -> MapSolution:
    labels = compact_labels(labels)
    bt = closed_form_b(labels, inst)
    q1 = restricted_fit(labels, bt, inst) + inst.lam * 2 * cut_size(labels, inst.graph)
    return MapSolution(labels, bt, q1, predict(bt[labels]), info)


def _sa_terms(inst: MapInstance):
    m = inst.mask
    e2 = 2.0 * inst.eps
    points = m[:, None] * inst.y_onehot + e2 * inst.prior
    weights = 2.0 * (m + e2)
    consts = 0.5 * m * np.sum(inst.y_onehot**2, axis=1) + inst.eps * np.sum(inst.prior**2, axis=1)
    return points, weights, consts


def solve_map(
    inst: MapInstance,
    k_max: int,
    method: str = "spectral",
    seed=None,
    restarts: int = 10,
    max_iter: int = 300,
    reweight_passes: int = 1,
    schedule: Schedule | None = None,
    sa_restarts: int = 1,
) -> MapSolution:
    """Search node partitions for the lowest ``Q1`` and read out classes.

    ``method="sa"`` anneals the labels with the energy ``Q1`` (the quadratic
    part in its per-cluster closed form, cut edges charged ``2 * lam``).
    ``method="spectral"`` embeds the surrogate signal ``[M Y, sqrt(eps) R]``
    with the graph, clusters for each ``k = 1..k_max`` and keeps the
    candidate with the lowest ``Q1``.
    """
    g = inst.graph
    k_max = min(k_max, g.n)
    if method == "sa":
        points, weights, consts = _sa_terms(inst)
        seeds = seed_sequence(seed).spawn(max(1, sa_restarts))
        best = None
        for ss in seeds:
            rng = np.random.default_rng(ss)
            state = SAState(points, weights, consts, g, rng.integers(k_max, size=g.n), k_max, 2.0 * inst.lam)
            trace = run_anneal(state, schedule or Schedule(), rng)
            energy = state.recompute_energy()
            if best is None or energy < best[0]:
                best = (energy, state.labels.copy(), trace)
        return make_map_solution(best[1], inst, method="sa", energy=best[0], trace=best[2])
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")

    signal = np.hstack([inst.mask[:, None] * inst.y_onehot, np.sqrt(inst.eps) * inst.prior])
    spec = _Spectra(signal, g, k_max)
    seeds = seed_sequence(seed).spawn(k_max)
    best = None
    table = []
    for k in range(1, k_max + 1):
        # the embedding's graph weight matches Q1's 2 * lam per cut edge
        cand = _solve_fixed_k(spec, 2.0 * inst.lam, k, restarts, max_iter, reweight_passes, seeds[k - 1])
        try:
            sol = make_map_solution(cand.labels, inst)
        except SingularSystem:
            continue
        table.append({"k": k, "effective_k": sol.k, "q1_objective": sol.q1_objective})
        if best is None or sol.q1_objective < best.q1_objective:
            best = sol
    if best is None:
        raise SingularSystem("every candidate partition left a cluster without labels")
    best.info = {"method": "spectral", "per_k": table}
    return best
