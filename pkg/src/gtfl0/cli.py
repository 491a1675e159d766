"""Command-line entry point.

Subcommands ``solve-gtf`` and ``solve-map`` run a solver on user data;
``support-recovery``, ``denoise``, ``timing`` and ``ssl`` run the seeded
experiments.  Experiment parameters come from defaults, then an optional
JSON ``--config`` file, then ``--set key=value`` pairs, then dedicated
flags (last wins).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annealing import Schedule, anneal
from .errors import ConfigError, GTFError
from .experiments import (
    DenoiseConfig,
    SslConfig,
    SupportRecoveryConfig,
    TimingConfig,
    _from_dict,
    run_denoise,
    run_ssl,
    run_support_recovery,
    run_timing,
)
from .graph import read_edge_list
from .io import dumps, read_labels_csv, read_matrix_csv, write_curve_csv, write_json
from .spectral import solve_p2_screen
from .ssl import MapInstance, solve_map

EXPERIMENTS = {
    "support-recovery": (SupportRecoveryConfig, run_support_recovery),
    "denoise": (DenoiseConfig, run_denoise),
    "timing": (TimingConfig, run_timing),
    "ssl": (SslConfig, run_ssl),
}

# config keys spelled after the model symbols
ALIASES = {"lambda": "lam", "eps": "epsilon"}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_sets(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        out[key.strip()] = _parse_value(value)
    return out


def _normalise_keys(data: dict, cls) -> dict:
    out = {}
    for key, value in data.items():
        key = ALIASES.get(key, key)
        if cls is SslConfig and key == "lam":
            key, value = "lam_grid", value if isinstance(value, list) else [value]
        out[key] = value
    return out


def resolve_config(cls, config_path=None, sets=None, flags=None):
    """Build a config dataclass from defaults, a JSON file, ``--set`` pairs
    and flag values, in increasing priority."""
    data = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(loaded)
    data.update(sets or {})
    data.update({k: v for k, v in (flags or {}).items() if v is not None})
    return _from_dict(cls, _normalise_keys(data, cls))


def _schedule(args) -> Schedule:
    return Schedule(args.t_start, args.t_end, args.cool, args.sweeps)


def _emit(payload: dict, out) -> None:
    if out:
        write_json(out, payload)
    else:
        print(dumps(payload))


def _write_trace(path, solution_info) -> None:
    if "trace" in solution_info:
        write_curve_csv(path, solution_info["trace"].tolist(), ["temperature", "sweep", "energy"])
    else:
        rows = [[r["k"], r.get("objective", r.get("q1_objective"))] for r in solution_info.get("per_k", [])]
        write_curve_csv(path, rows, ["k", "objective"])


def cmd_solve_gtf(args) -> int:
    g = read_edge_list(args.graph, repair=args.repair, seed=args.seed)
    y = read_matrix_csv(args.signal, header=args.header)
    if args.method == "spectral":
        sol = solve_p2_screen(
            y, g, args.lam, args.k_max, args.restarts, reweight_passes=args.reweight_passes, seed=args.seed
        )
    else:
        sol = anneal(y, g, args.lam, args.k_max, _schedule(args), seed=args.seed, restarts=args.restarts)
    payload = {
        "command": "solve-gtf",
        "method": args.method,
        "lambda": args.lam,
        "seed": args.seed,
        "n": g.n,
        "edges": g.m,
        "solution": sol.to_json(),
    }
    if "per_k" in sol.info:
        payload["per_k"] = sol.info["per_k"]
    if "energy" in sol.info:
        payload["energy"] = float(sol.info["energy"])
    _emit(payload, args.out)
    if args.trace:
        _write_trace(args.trace, sol.info)
    return 0


def cmd_solve_map(args) -> int:
    g = read_edge_list(args.graph, repair=args.repair, seed=args.seed)
    given = read_labels_csv(args.labels, header=args.header)
    inst = MapInstance.from_labels(given, g, args.lam, args.epsilon)
    sol = solve_map(
        inst, args.k_max, args.method, seed=args.seed, restarts=args.restarts,
        reweight_passes=args.reweight_passes, schedule=_schedule(args),
    )
    payload = {
        "command": "solve-map",
        "method": args.method,
        "lambda": args.lam,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "solution": sol.to_json(),
    }
    _emit(payload, args.out)
    if args.trace:
        _write_trace(args.trace, sol.info)
    return 0


def cmd_experiment(args) -> int:
    cls, run = EXPERIMENTS[args.command]
    flags = {"seed": args.seed, "method": args.method, "k_max": args.k_max}
    if args.lam is not None:
        flags["lambda"] = args.lam
    if cls is SslConfig:
        flags.update(epsilon=args.epsilon, features=args.features, labels=args.labels)
        if args.features is not None:
            flags["dataset"] = "csv"
        if args.header:
            flags["header"] = True
    cfg = resolve_config(cls, args.config, _parse_sets(args.set), flags)
    report = run(cfg)
    payload = report.to_json()
    _emit(payload, args.out)
    if args.out:
        stem = Path(args.out).with_suffix("")
        for name, points in payload["curves"].items():
            write_curve_csv(f"{stem}.{name}.csv", points, ["x", "y"])
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="RNG seed (non-negative integer)")
    p.add_argument("--method", choices=("spectral", "sa"), default=None)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--k-max", dest="k_max", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--header", action="store_true", help="CSV inputs have a header row")


def _add_solver_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge list, one 'i j' pair per line")
    p.add_argument("--repair", action="store_true", help="connect components with random edges")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--reweight-passes", dest="reweight_passes", type=int, default=1)
    p.add_argument("--t-start", dest="t_start", type=float, default=100.0)
    p.add_argument("--t-end", dest="t_end", type=float, default=0.001)
    p.add_argument("--cool", type=float, default=0.99)
    p.add_argument("--sweeps", type=int, default=1)
    p.add_argument("--trace", help="CSV path for the energy trace (sa) or per-k objectives (spectral)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtfl0", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-gtf", help="piecewise-constant fit of a graph signal")
    _add_common(p)
    _add_solver_opts(p)
    p.add_argument("--signal", required=True, help="CSV with one row per node")
    p.set_defaults(func=cmd_solve_gtf, method="spectral", lam=1.0, k_max=8, seed=0)

    p = sub.add_parser("solve-map", help="semi-supervised labelling")
    _add_common(p)
    _add_solver_opts(p)
    p.add_argument("--labels", required=True, help="CSV of class ids, -1 for unlabelled")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.set_defaults(func=cmd_solve_map, method="spectral", lam=0.3, k_max=6, seed=0, t_start=10.0, cool=0.98)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common(p)
        p.add_argument("--config", help="JSON file with config keys")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        if name == "ssl":
            p.add_argument("--features", help="CSV feature matrix")
            p.add_argument("--labels", help="CSV of true classes")
            p.add_argument("--epsilon", type=float, default=None)
        p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (GTFError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
