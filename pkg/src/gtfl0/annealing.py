"""Heat-bath simulated annealing over node labels.

The energy is a Potts model: a within-cluster sum of squares plus a
coupling per edge whose endpoints disagree,

    H(delta) = sum_i ||y_i - c_{delta_i}||^2 + lam * #{(i, j) in E : delta_i != delta_j},

with ``c_j`` the mean of cluster ``j``.  Edges are counted once.  The
ordered-pair sum ``sum_{i,j} A_ij [delta_i != delta_j]`` counts each crossing
edge twice, so ``H`` with coupling ``2 * lam`` is that double-counted energy
at ``lam``, and equals ``2 * P1(lam)``.  :func:`anneal` takes the P1 value of
``lam`` and runs with coupling ``2 * lam``.

Internally clusters are scored in the weighted form

    cost(C) = sum_{i in C} q_i - ||sum_{i in C} s_i||^2 / sum_{i in C} w_i,

which reduces to the sum of squares for ``s = y, w = 1, q = ||y||^2`` and
also covers the masked/prior fit used for semi-supervised labelling.

RNG consumption order per run: initial labels (``n`` integers), then for
every temperature and every sweep ``n`` uniforms for the visiting order
followed by ``n`` uniforms for the roulette draws.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import LabelOutOfRange
from .graph import Graph
from .rng import seed_sequence
from .model import GtfSolution, as_signal, make_solution


@dataclass(frozen=True)
class Schedule:
    t_start: float = 100.0
    t_end: float = 0.001
    cool: float = 0.99
    sweeps: int = 1

    def __post_init__(self):
        if not self.t_start > self.t_end > 0:
            raise ValueError("need t_start > t_end > 0")
        if not 0 < self.cool < 1:
            raise ValueError("cool must lie in (0, 1)")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")

    def temperatures(self) -> np.ndarray:
        temps = []
        t = self.t_start
        while t >= self.t_end:
            temps.append(t)
            t *= self.cool
        return np.asarray(temps)


def _cluster_term(sq_norm: float, weight: float) -> float:
    return sq_norm / weight if weight > 1e-300 else 0.0


class SAState:
    """Label vector plus the running sums needed for O(k d + deg) moves.

    ``points``, ``weights`` and ``consts`` are the per-node ``s_i``, ``w_i`` and
    ``q_i`` of the weighted cluster cost; :meth:`for_signal` builds them for
    the plain sum-of-squares energy.
    """

    def __init__(self, points, weights, consts, g: Graph, labels, k: int, coupling: float):
        self.points = np.ascontiguousarray(points, dtype=float)
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.consts = np.ascontiguousarray(consts, dtype=float)
        self.g = g
        self.k = int(k)
        self.coupling = float(coupling)
        labels = np.asarray(labels, dtype=np.int64).copy()
        if labels.size != g.n:
            raise LabelOutOfRange(f"{labels.size} labels for {g.n} nodes")
        if labels.min() < 0 or labels.max() >= self.k:
            raise LabelOutOfRange(f"labels must lie in [0, {self.k})")
        self.labels = labels
        self.indptr, self.indices = g.neighbors
        self.degree = g.degrees.astype(np.int64)
        self._rebuild()

    @classmethod
    def for_signal(cls, y, g: Graph, labels, k: int, lam: float) -> "SAState":
        """State for ``H`` with single-counted edge coupling ``lam``."""
        y = as_signal(y)
        return cls(y, np.ones(len(y)), np.sum(y**2, axis=1), g, labels, k, lam)

    def _rebuild(self):
        k, d = self.k, self.points.shape[1]
        self.cluster_sum = np.zeros((k, d))
        np.add.at(self.cluster_sum, self.labels, self.points)
        self.cluster_weight = np.bincount(self.labels, self.weights, minlength=k).astype(float)
        self.cluster_count = np.bincount(self.labels, minlength=k).astype(np.int64)
        self.nbr_count = np.zeros((self.g.n, k), dtype=np.int64)
        e = self.g.edges
        np.add.at(self.nbr_count, (e[:, 0], self.labels[e[:, 1]]), 1)
        np.add.at(self.nbr_count, (e[:, 1], self.labels[e[:, 0]]), 1)
        self.energy = self.recompute_energy()

    def recompute_energy(self) -> float:
        """Energy of the current labels from scratch."""
        return _energy(
            self.points, self.weights, self.consts, self.g, self.labels, self.k, self.coupling
        )

    def delta_h(self, i: int, t: int) -> float:
        """Energy change when node ``i`` switches to label ``t``."""
        if not 0 <= t < self.k:
            raise LabelOutOfRange(f"label {t} outside [0, {self.k})")
        return float(self.delta_all(i)[t])

    def delta_all(self, i: int) -> np.ndarray:
        """Energy change for every target label of node ``i`` (0 at its own)."""
        return _delta_all(
            i, self.labels, self.points, self.weights, self.cluster_sum,
            self.cluster_weight, self.cluster_count, self.nbr_count, self.coupling,
        )

    def probabilities(self, i: int, temperature: float) -> np.ndarray:
        return heat_bath_probabilities(self.delta_all(i), temperature)

    def move(self, i: int, t: int) -> None:
        dh = self.delta_h(i, t)
        _apply_move(
            i, t, self.labels, self.points, self.weights, self.cluster_sum,
            self.cluster_weight, self.cluster_count, self.nbr_count, self.indptr, self.indices,
        )
        self.energy += dh


def _energy(points, weights, consts, g, labels, k, coupling) -> float:
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    wsum = np.bincount(labels, weights, minlength=k)
    fit = float(consts.sum())
    for c in range(k):
        fit -= _cluster_term(float(sums[c] @ sums[c]), float(wsum[c]))
    cut = np.count_nonzero(labels[g.edges[:, 0]] != labels[g.edges[:, 1]])
    return fit + coupling * cut


def hamiltonian(y, g: Graph, labels, lam: float, k: int | None = None) -> float:
    """``sum_i ||y_i - c_{delta_i}||^2 + lam * cut(delta)`` (edges counted once).

    Empty clusters contribute nothing.
    """
    y = as_signal(y)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size != g.n:
        raise LabelOutOfRange(f"{labels.size} labels for {g.n} nodes")
    k = int(labels.max()) + 1 if k is None else int(k)
    if labels.min() < 0 or labels.max() >= k:
        raise LabelOutOfRange(f"labels must lie in [0, {k})")
    return _energy(y, np.ones(g.n), np.sum(y**2, axis=1), g, labels, k, lam)


def heat_bath_probabilities(delta_h, temperature: float) -> np.ndarray:
    """``p_t = exp(-dH_t / T) / sum_l exp(-dH_l / T)``, shifted for stability."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    x = -np.asarray(delta_h, dtype=float) / temperature
    x -= x.max()
    p = np.exp(x)
    return p / p.sum()


@numba.njit(cache=True)
def _delta_all(i, labels, points, weights, csum, cweight, ccount, nbr, coupling):
    k = csum.shape[0]
    d = points.shape[1]
    s = labels[i]
    w = weights[i]
    out = np.zeros(k)
    # source cluster after removing i
    old_s = 0.0
    new_s = 0.0
    for a in range(d):
        old_s += csum[s, a] * csum[s, a]
        v = csum[s, a] - points[i, a]
        new_s += v * v
    ws_old = cweight[s]
    ws_new = cweight[s] - w
    gain_s = (old_s / ws_old if ws_old > 1e-300 else 0.0)
    if ccount[s] > 1 and ws_new > 1e-300:
        gain_s -= new_s / ws_new
    for t in range(k):
        if t == s:
            continue
        old_t = 0.0
        new_t = 0.0
        for a in range(d):
            old_t += csum[t, a] * csum[t, a]
            v = csum[t, a] + points[i, a]
            new_t += v * v
        wt_old = cweight[t]
        wt_new = cweight[t] + w
        dt = 0.0
        if ccount[t] > 0 and wt_old > 1e-300:
            dt += old_t / wt_old
        if wt_new > 1e-300:
            dt -= new_t / wt_new
        out[t] = gain_s + dt + coupling * (nbr[i, s] - nbr[i, t])
    return out


@numba.njit(cache=True)
def _apply_move(i, t, labels, points, weights, csum, cweight, ccount, nbr, indptr, indices):
    s = labels[i]
    if s == t:
        return
    for a in range(points.shape[1]):
        csum[s, a] -= points[i, a]
        csum[t, a] += points[i, a]
    cweight[s] -= weights[i]
    cweight[t] += weights[i]
    ccount[s] -= 1
    ccount[t] += 1
    if ccount[s] == 0:
        # drop accumulated rounding so an empty cluster is exactly empty
        for a in range(points.shape[1]):
            csum[s, a] = 0.0
        cweight[s] = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        j = indices[p]
        nbr[j, s] -= 1
        nbr[j, t] += 1
    labels[i] = t


@numba.njit(cache=True)
def _anneal_block(temps, keys, uniforms, labels, points, weights, csum, cweight, ccount,
                  nbr, indptr, indices, coupling, energy, trace):
    k = csum.shape[0]
    n = labels.shape[0]
    row = 0
    for ti in range(temps.shape[0]):
        temp = temps[ti]
        for sw in range(keys.shape[1]):
            order = np.argsort(keys[ti, sw])
            for pos in range(n):
                i = order[pos]
                dh = _delta_all(i, labels, points, weights, csum, cweight, ccount, nbr, coupling)
                lo = dh[0]
                for t in range(1, k):
                    if dh[t] < lo:
                        lo = dh[t]
                probs = np.empty(k)
                total = 0.0
                for t in range(k):
                    probs[t] = np.exp(-(dh[t] - lo) / temp)
                    total += probs[t]
                target = uniforms[ti, sw, pos] * total
                acc = 0.0
                choice = k - 1
                for t in range(k):
                    acc += probs[t]
                    if target < acc:
                        choice = t
                        break
                if choice != labels[i]:
                    energy += dh[choice]
                    _apply_move(i, choice, labels, points, weights, csum, cweight,
                                ccount, nbr, indptr, indices)
            trace[row, 0] = temp
            trace[row, 1] = sw
            trace[row, 2] = energy
            row += 1
    return energy


def run_anneal(state: SAState, schedule: Schedule, rng: np.random.Generator,
               block_size: int = 1_000_000):
    """Anneal ``state`` in place.  Returns the energy trace as an
    ``(n_temps * sweeps, 3)`` array of ``(temperature, sweep, energy)``."""
    temps = schedule.temperatures()
    n, sweeps = state.g.n, schedule.sweeps
    per_temp = max(1, 2 * sweeps * n)
    chunk = max(1, block_size // per_temp)
    traces = []
    energy = state.energy
    for start in range(0, temps.size, chunk):
        tb = temps[start:start + chunk]
        draws = rng.random((tb.size, sweeps, 2, n))
        trace = np.empty((tb.size * sweeps, 3))
        energy = _anneal_block(
            tb, np.ascontiguousarray(draws[:, :, 0, :]), np.ascontiguousarray(draws[:, :, 1, :]),
            state.labels, state.points, state.weights, state.cluster_sum, state.cluster_weight,
            state.cluster_count, state.nbr_count, state.indptr, state.indices,
            state.coupling, energy, trace,
        )
        traces.append(trace)
    state.energy = energy
    return np.vstack(traces) if traces else np.empty((0, 3))


def anneal(
    y,
    g: Graph,
    lam: float,
    k: int,
    schedule: Schedule | None = None,
    seed=None,
    restarts: int = 1,
    init=None,
) -> GtfSolution:
    """Minimise P1 with ``lam`` by heat-bath annealing from ``k`` labels.

    ``k`` should overestimate the number of pieces; clusters that empty out
    during cooling disappear from the result.  With ``restarts > 1`` the run
    with the lowest final energy wins.  The solution's ``info`` holds the
    final energy and the energy trace of the winning run.
    """
    y = as_signal(y)
    schedule = schedule or Schedule()
    seeds = seed_sequence(seed).spawn(max(1, restarts))
    best = None
    for ss in seeds:
        rng = np.random.default_rng(ss)
        labels0 = rng.integers(k, size=g.n) if init is None else np.asarray(init)
        state = SAState.for_signal(y, g, labels0, k, 2.0 * lam)
        trace = run_anneal(state, schedule, rng)
        final = state.recompute_energy()
        if best is None or final < best[0]:
            best = (final, state.labels.copy(), trace)
    final, labels, trace = best
    return make_solution(y, labels, g, lam, energy=final, trace=trace, requested_k=k)
