"""Seeded desk-scale experiments: boundary recovery, denoising, timing and
semi-supervised classification.

Every ``run_*`` function takes a config dataclass and returns an
:class:`ExperimentReport`.  Reports are deterministic for a fixed config
except for fields whose key contains ``wall_time``.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .annealing import Schedule, anneal
from .errors import ConfigError, DataNotFound
from .graph import Graph, inter_community_edges, knn_graph, planted_partition
from .io import read_matrix_csv
from .metrics import input_snr_db, misclassification, recon_snr_db, roc_curve, sigma2_for_snr
from .spectral import solve_p2_path, solve_p2_screen
from .ssl import MapInstance, solve_map

REPORT_SCHEMA = {
    "type": "object",
    "required": ["experiment", "config", "seed", "metrics", "curves"],
    "properties": {
        "experiment": {"type": "string"},
        "config": {"type": "object"},
        "seed": {"type": "integer"},
        "metrics": {"type": "object", "additionalProperties": {"type": "number"}},
        "curves": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
    },
}


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed: int
    metrics: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "metrics": {k: float(v) for k, v in self.metrics.items()},
            "curves": {k: [[float(a), float(b)] for a, b in v] for k, v in self.curves.items()},
        }


def _from_dict(cls, data: dict | None):
    data = dict(data or {})
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def log_grid(lo: float, hi: float, num: int) -> list[float]:
    return np.geomspace(lo, hi, num).tolist()


def planted_signal(labels, values, d: int, sigma2: float, rng: np.random.Generator):
    """Ground truth ``Y*`` (community value repeated over ``d`` columns) and
    a noisy copy with i.i.d. ``N(0, sigma2)`` entries added."""
    y_star = np.repeat(np.asarray(values, dtype=float)[labels][:, None], d, axis=1)
    return y_star, y_star + math.sqrt(sigma2) * rng.standard_normal(y_star.shape)


@dataclass
class PlantedConfig:
    sizes: list = field(default_factory=lambda: [50, 70, 80])
    p: float = 0.2
    q: float = 0.05
    values: list = field(default_factory=lambda: [1.0, -1.0, 0.0])
    d: int = 10
    snr_db: float = 12.0
    sigma2: float | None = None
    method: str = "spectral"
    k_max: int = 8
    sa_k: int = 7
    t_start: float = 100.0
    t_end: float = 0.001
    cool: float = 0.95
    sweeps: int = 1
    restarts: int = 10
    reweight_passes: int = 1
    seed: int = 0

    def schedule(self) -> Schedule:
        return Schedule(self.t_start, self.t_end, self.cool, self.sweeps)

    def check(self):
        if self.method not in ("spectral", "sa"):
            raise ConfigError(f"method must be 'spectral' or 'sa', got {self.method!r}")
        if len(self.values) != len(self.sizes):
            raise ConfigError("values and sizes must have the same length")


def _instance(cfg: PlantedConfig, ss: np.random.SeedSequence, snr_db=None):
    g_seed, n_seed = ss.spawn(2)
    g, labels = planted_partition(cfg.sizes, cfg.p, cfg.q, g_seed)
    rng = np.random.default_rng(n_seed)
    y_star = np.repeat(np.asarray(cfg.values, dtype=float)[labels][:, None], cfg.d, axis=1)
    if cfg.sigma2 is not None and snr_db is None:
        sigma2 = cfg.sigma2
    else:
        sigma2 = sigma2_for_snr(y_star, cfg.snr_db if snr_db is None else snr_db)
    _, y = planted_signal(labels, cfg.values, cfg.d, sigma2, rng)
    return g, labels, y_star, y, sigma2


def _solve_path(cfg: PlantedConfig, y, g: Graph, lams, ss):
    if cfg.method == "spectral":
        return solve_p2_path(y, g, lams, cfg.k_max, cfg.restarts, reweight_passes=cfg.reweight_passes, seed=ss)
    seeds = ss.spawn(len(lams))
    return [anneal(y, g, lam, cfg.sa_k, cfg.schedule(), seed=s) for lam, s in zip(lams, seeds)]


# -- boundary-edge recovery ---------------------------------------------------


@dataclass
class SupportRecoveryConfig(PlantedConfig):
    n_seeds: int = 5
    lam_min: float = 1e-3
    lam_max: float = 1e2
    n_lam: int = 30


def persistence_scores(solutions, lams, g: Graph) -> np.ndarray:
    """Largest ``lam`` at which each edge is a boundary of the estimate (0 if never)."""
    scores = np.zeros(g.m)
    for lam, sol in sorted(zip(lams, solutions), key=lambda p: p[0]):
        b = sol.reconstruction
        jumps = np.linalg.norm(b[g.edges[:, 0]] - b[g.edges[:, 1]], axis=1) > 0
        scores[jumps] = lam
    return scores


def run_support_recovery(cfg: SupportRecoveryConfig) -> ExperimentReport:
    cfg.check()
    lams = log_grid(cfg.lam_min, cfg.lam_max, cfg.n_lam)
    aucs, snrs = [], []
    first_roc = None
    for ss in np.random.SeedSequence(cfg.seed).spawn(cfg.n_seeds):
        g_ss, s_ss = ss.spawn(2)
        g, labels, y_star, y, sigma2 = _instance(cfg, g_ss)
        sols = _solve_path(cfg, y, g, lams, s_ss)
        scores = persistence_scores(sols, lams, g)
        points, auc = roc_curve(scores, inter_community_edges(g, labels))
        aucs.append(auc)
        snrs.append(input_snr_db(y_star, sigma2))
        if first_roc is None:
            first_roc = points
    metrics = {"auc": float(np.mean(aucs)), "auc_min": float(np.min(aucs)), "input_snr_db": float(np.mean(snrs))}
    return ExperimentReport(
        "support-recovery", asdict(cfg), cfg.seed, metrics,
        {"roc": first_roc.tolist(), "auc_per_seed": [[i, a] for i, a in enumerate(aucs)]},
    )


# -- denoising ----------------------------------------------------------------


@dataclass
class DenoiseConfig(PlantedConfig):
    snr_grid: list = field(default_factory=lambda: [6.0, 9.0, 12.0, 15.0])
    n_seeds: int = 3
    lam_min: float = 1e-3
    lam_max: float = 1e1
    n_lam: int = 12


def run_denoise(cfg: DenoiseConfig) -> ExperimentReport:
    """Input SNR against the best reconstruction SNR over the ``lam`` grid
    (ground-truth tuning), averaged over seeds."""
    cfg.check()
    lams = log_grid(cfg.lam_min, cfg.lam_max, cfg.n_lam)
    curve, gain, kstar = [], [], []
    # same graphs and noise draws at every SNR level
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.n_seeds)
    metrics = {}
    for snr in cfg.snr_grid:
        recon, ks = [], []
        for s in seeds:
            g_ss, s_ss = np.random.SeedSequence(int(s)).spawn(2)
            g, labels, y_star, y, _ = _instance(cfg, g_ss, snr_db=snr)
            sols = _solve_path(cfg, y, g, lams, s_ss)
            vals = [recon_snr_db(y_star, s.reconstruction) for s in sols]
            best = int(np.argmax(vals))
            recon.append(vals[best])
            ks.append(sols[best].k)
        mean = float(np.mean(recon))
        curve.append([snr, mean])
        gain.append([snr, mean - snr])
        kstar.append([snr, float(np.mean(ks))])
        metrics[f"recon_snr_db@{snr:g}"] = mean
    metrics["min_gain_db_top2"] = float(min(g for _, g in sorted(gain)[-2:]))
    return ExperimentReport(
        "denoise", asdict(cfg), cfg.seed, metrics,
        {"snr_in_vs_out": curve, "gain_db": gain, "k_star": kstar},
    )


# -- timing -------------------------------------------------------------------


@dataclass
class TimingConfig(PlantedConfig):
    settings: list = field(default_factory=lambda: [[0.1, 0.01], [0.5, 0.1], [0.9, 0.2]])
    n_seeds: int = 10
    lam: float = 0.1


def run_timing(cfg: TimingConfig) -> ExperimentReport:
    cfg.check()
    edges_curve, time_curve, metrics = [], [], {}
    means = []
    root = np.random.SeedSequence(cfg.seed)
    for idx, (p, q) in enumerate(cfg.settings):
        ms, ts = [], []
        for ss in root.spawn(cfg.n_seeds):
            g_ss, s_ss = ss.spawn(2)
            sub = _copy_planted(cfg, p, q)
            g, _, _, y, _ = _instance(sub, g_ss)
            t0 = time.perf_counter()
            if cfg.method == "spectral":
                solve_p2_screen(y, g, cfg.lam, cfg.k_max, cfg.restarts, reweight_passes=cfg.reweight_passes, seed=s_ss)
            else:
                anneal(y, g, cfg.lam, cfg.sa_k, cfg.schedule(), seed=s_ss)
            ts.append(time.perf_counter() - t0)
            ms.append(g.m)
        means.append(float(np.mean(ts)))
        edges_curve.append([idx, float(np.mean(ms))])
        time_curve.append([float(np.mean(ms)), float(np.mean(ts))])
        metrics[f"edges_mean[{p:g},{q:g}]"] = float(np.mean(ms))
        metrics[f"edges_std[{p:g},{q:g}]"] = float(np.std(ms))
        metrics[f"wall_time_mean_s[{p:g},{q:g}]"] = float(np.mean(ts))
        metrics[f"wall_time_std_s[{p:g},{q:g}]"] = float(np.std(ts))
    e = [v for _, v in edges_curve]
    metrics["edge_ratio"] = max(e) / min(e)
    metrics["wall_time_ratio"] = max(means) / min(means)
    return ExperimentReport(
        "timing", asdict(cfg), cfg.seed, metrics,
        {"edges_by_setting": edges_curve, "wall_time_vs_edges": time_curve},
    )


def _copy_planted(cfg: PlantedConfig, p: float, q: float) -> PlantedConfig:
    base = {f.name: getattr(cfg, f.name) for f in fields(PlantedConfig)}
    base.update(p=p, q=q)
    return PlantedConfig(**base)


# -- semi-supervised classification ---------------------------------------------


@dataclass
class SslConfig:
    dataset: str = "blobs"
    features: str | None = None
    labels: str | None = None
    label_column: int | None = None
    header: bool = False
    n_per_class: int = 50
    blob_std: float = 1.0
    knn: int = 5
    label_rate: float = 0.2
    epsilon: float = 0.01
    lam_grid: list = field(default_factory=lambda: [0.03, 0.1, 0.3, 1.0])
    method: str = "spectral"
    k_max: int = 6
    t_start: float = 10.0
    t_end: float = 0.001
    cool: float = 0.98
    sweeps: int = 1
    trials: int = 100
    seed: int = 0


BLOB_CENTERS = np.array([[0.0, 0.0], [6.0, 0.0], [3.0, 5.0]])


def make_blobs(n_per_class: int, std: float, rng: np.random.Generator):
    """Three isotropic Gaussian blobs around :data:`BLOB_CENTERS`."""
    truth = np.repeat(np.arange(len(BLOB_CENTERS)), n_per_class)
    x = BLOB_CENTERS[truth] + std * rng.standard_normal((truth.size, 2))
    return x, truth


def load_ssl_data(cfg: SslConfig, rng: np.random.Generator):
    if cfg.dataset == "blobs" and cfg.features is None:
        return make_blobs(cfg.n_per_class, cfg.blob_std, rng)
    if cfg.features is None:
        raise ConfigError("features path is required for non-blob datasets")
    if not Path(cfg.features).exists():
        raise DataNotFound(cfg.features)
    x = read_matrix_csv(cfg.features, header=cfg.header)
    if cfg.labels is not None:
        if not Path(cfg.labels).exists():
            raise DataNotFound(cfg.labels)
        truth = read_matrix_csv(cfg.labels, header=cfg.header).ravel().astype(np.int64)
    elif cfg.label_column is not None:
        truth = x[:, cfg.label_column].astype(np.int64)
        x = np.delete(x, cfg.label_column, axis=1)
    else:
        raise ConfigError("give a labels file or label_column")
    _, truth = np.unique(truth, return_inverse=True)
    return x, truth.ravel()


def run_ssl(cfg: SslConfig) -> ExperimentReport:
    """Repeated random label masks; misclassification on unlabelled samples
    for each ``lam``, reporting the best ``lam`` by mean error."""
    if cfg.method not in ("spectral", "sa"):
        raise ConfigError(f"method must be 'spectral' or 'sa', got {cfg.method!r}")
    data_ss, graph_ss, trial_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    x, truth = load_ssl_data(cfg, np.random.default_rng(data_ss))
    g = knn_graph(x, cfg.knn, seed=graph_ss)
    n, n_classes = truth.size, int(truth.max()) + 1
    n_obs = max(1, int(round(cfg.label_rate * n)))
    sched = Schedule(cfg.t_start, cfg.t_end, cfg.cool, cfg.sweeps)
    errors = np.zeros((len(cfg.lam_grid), cfg.trials))
    for t, ss in enumerate(trial_ss.spawn(cfg.trials)):
        mask_ss, solve_ss = ss.spawn(2)
        observed = np.random.default_rng(mask_ss).choice(n, n_obs, replace=False)
        given = np.full(n, -1)
        given[observed] = truth[observed]
        hidden = given < 0
        for li, lam in enumerate(cfg.lam_grid):
            inst = MapInstance.from_labels(given, g, lam, cfg.epsilon, n_classes=n_classes)
            sol = solve_map(inst, cfg.k_max, cfg.method, seed=solve_ss, schedule=sched)
            errors[li, t] = misclassification(sol.predicted, truth, hidden)
    means = errors.mean(axis=1)
    best = int(np.argmin(means))
    metrics = {
        "misclassification": float(means[best]),
        "misclassification_var": float(errors[best].var()),
        "best_lambda": float(cfg.lam_grid[best]),
        "n": float(n),
        "edges": float(g.m),
    }
    return ExperimentReport(
        "ssl", asdict(cfg), cfg.seed, metrics,
        {"misclassification_vs_lambda": [[float(l), float(m)] for l, m in zip(cfg.lam_grid, means)]},
    )
