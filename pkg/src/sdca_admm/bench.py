"""Benchmark harness: run SDCA-ADMM on the two experiment families, write CSV traces.

Usage::

    sdca-admm synth --rows 8 --cols 8 --n 128 --epochs 50 --out synth.csv
    sdca-admm graph --train a9a --test a9a.t --edges corr:0.3 --out a9a.csv

Each run writes ``OUT`` with one row per (repeat, checkpoint) and
``OUT`` with ``.aggregate`` inserted before the suffix, holding the
per-checkpoint mean and standard deviation across repeats.
"""
import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .data import build_edges_by_correlation, gen_synthetic_grid, read_libsvm
from .losses import LossFamily
from .regularizers import build_graph_guided, build_overlapped_group, read_edges
from .solver import (
    ProblemInstance,
    SolverConfig,
    compute_test_metrics,
    reference_optimum,
    run_batch_admm,
    run_sdca_admm,
)

__all__ = [
    "SyntheticGrid",
    "GraphGuided",
    "ExperimentConfig",
    "TRACE_COLUMNS",
    "run_experiment",
    "compute_test_metrics",
    "aggregate_path_for",
    "main",
]

TRACE_COLUMNS = (
    "repeat",
    "epoch",
    "wall_seconds",
    "primal_objective",
    "excess_risk",
    "dual_objective",
    "feasibility",
    "test_loss",
    "test_error",
)
_METRICS = TRACE_COLUMNS[2:]

SUB_BATCH_SIZE = 50


@dataclass(frozen=True)
class SyntheticGrid:
    rows: int = 32
    cols: int = 32
    n: int = 512
    noise_sd: float = 0.1
    test_n: Optional[int] = None


@dataclass(frozen=True)
class GraphGuided:
    train_path: str
    test_path: Optional[str] = None
    # an edge-list path, or "corr:<threshold>"
    edge_source: str = "corr:0.5"
    max_edges: Optional[int] = None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: Union[SyntheticGrid, GraphGuided]
    solver: SolverConfig = field(default_factory=SolverConfig)
    method: str = "sdca"
    loss: LossFamily = LossFamily.SMOOTHED_HINGE
    C1: Optional[float] = None
    C2: Optional[float] = None
    eps: Optional[float] = None
    repeats: int = 1
    output_path: str = "trace.csv"
    record_wall_clock: bool = True
    reference_multiplier: int = 50
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.method not in ("sdca", "batch"):
            raise ValueError(f"unknown method {self.method!r}")


def aggregate_path_for(path):
    path = Path(path)
    return path.with_name(f"{path.stem}.aggregate{path.suffix or '.csv'}")


def default_K(n):
    """Number of blocks giving sub-batches of about 50 samples."""
    return max(1, min(n, math.ceil(n / SUB_BATCH_SIZE)))


def _parse_edge_source(source, train):
    if source.startswith("corr:"):
        thr = float(source[len("corr:"):])
        return build_edges_by_correlation(train, thr)
    return read_edges(source)


def _build_instances(config):
    """Yield ``(repeat, problem, test_set)`` for every repeat."""
    spec = config.problem
    base_seed = config.solver.seed
    if isinstance(spec, SyntheticGrid):
        for r in range(config.repeats):
            rng = np.random.default_rng(base_seed + r)
            train, w0 = gen_synthetic_grid(spec.rows, spec.cols, spec.n, spec.noise_sd, rng)
            test, _ = gen_synthetic_grid(
                spec.rows, spec.cols, spec.test_n or spec.n, spec.noise_sd, rng,
                true_weights=w0,
            )
            C = config.C1 if config.C1 is not None else 0.1 / math.sqrt(spec.n)
            eps = config.eps if config.eps is not None else 0.01
            reg = build_overlapped_group(spec.rows, spec.cols, C, eps)
            yield r, ProblemInstance(train.Z, train.labels, reg, config.loss), test
        return

    train = read_libsvm(spec.train_path)
    test = None
    if spec.test_path:
        test = read_libsvm(spec.test_path, n_features=None)
        p = max(train.feature_dim, test.feature_dim)
        if train.feature_dim < p:
            train = read_libsvm(spec.train_path, n_features=p)
        if test.feature_dim < p:
            test = read_libsvm(spec.test_path, n_features=p)
    p, n = train.feature_dim, train.sample_count
    edges = _parse_edge_source(spec.edge_source, train)
    if spec.max_edges is not None:
        edges = edges[: spec.max_edges]
    C1 = config.C1 if config.C1 is not None else 0.01 / math.sqrt(n)
    C2 = config.C2 if config.C2 is not None else C1 * len(edges) / p
    eps = config.eps if config.eps is not None else 0.02
    problem = ProblemInstance(train.Z, train.labels, build_graph_guided(p, edges, C1, C2, eps),
                              config.loss)
    for r in range(config.repeats):
        yield r, problem, test


def _instance_key(problem, solver_cfg, budget, multiplier):
    h = hashlib.sha256()
    for arr in (problem.Z.csc.data, problem.Z.csc.indices, problem.Z.csc.indptr,
                problem.labels, problem.reg.B.csc.data, problem.reg.B.csc.indices,
                problem.reg.B.csc.indptr, problem.reg.simple.group_weights,
                problem.reg.simple.group_of):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(repr((problem.reg.simple.eps, problem.loss.value, solver_cfg.rho,
                   solver_cfg.K, solver_cfg.seed, budget, multiplier)).encode())
    return h.hexdigest()


def _reference(problem, solver_cfg, budget, multiplier, cache_dir):
    path = None
    if cache_dir is not None:
        key = _instance_key(problem, solver_cfg, budget, multiplier)
        path = Path(cache_dir) / f"ref-{key[:32]}.json"
        if path.exists():
            return json.loads(path.read_text())["best"]
    best, lower = reference_optimum(problem, solver_cfg, budget, multiplier)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"best": best, "lower_bound": lower}))
    return best


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def run_experiment(config):
    """Run every repeat and write the trace and aggregate CSV files.

    Returns
    -------
    trace_path, aggregate_path : pathlib.Path
    """
    solve = run_sdca_admm if config.method == "sdca" else run_batch_admm
    rows = []
    for r, problem, test in _build_instances(config):
        cfg = replace(config.solver, seed=config.solver.seed + r)
        if cfg.K > problem.n:
            raise ValueError(f"K={cfg.K} exceeds the number of training samples {problem.n}")
        _, trace = solve(problem, cfg, test_set=test)
        budget = max(int(cfg.max_epochs), 100)
        ref = _reference(problem, cfg, budget, config.reference_multiplier, config.cache_dir)
        # the reference run stops early; never let it sit above what this run reached
        ref = min([ref] + [rec.primal_objective for rec in trace])
        for rec in trace:
            rows.append({
                "repeat": r,
                "epoch": rec.epoch,
                "wall_seconds": rec.wall_seconds if config.record_wall_clock else 0.0,
                "primal_objective": rec.primal_objective,
                "excess_risk": rec.primal_objective - ref,
                "dual_objective": rec.dual_objective,
                "feasibility": rec.constraint_residual,
                "test_loss": rec.test_loss,
                "test_error": rec.test_error,
            })

    out = Path(config.output_path)
    agg_out = aggregate_path_for(out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in TRACE_COLUMNS])
    _write_aggregate(agg_out, rows)
    return out, agg_out


def _write_aggregate(path, rows):
    by_epoch = {}
    for row in rows:
        by_epoch.setdefault(row["epoch"], []).append(row)
    header = ["epoch", "n_repeats"]
    for m in _METRICS:
        header += [f"{m}_mean", f"{m}_std"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for epoch in sorted(by_epoch):
            group = by_epoch[epoch]
            line = [_fmt(epoch), str(len(group))]
            for m in _METRICS:
                vals = [g[m] for g in group if g[m] is not None]
                if not vals:
                    line += ["", ""]
                    continue
                arr = np.asarray(vals, dtype=np.float64)
                with np.errstate(invalid="ignore"):
                    line += [_fmt(arr.mean()), _fmt(arr.std())]
            writer.writerow(line)


def _add_common(p):
    p.add_argument("--K", type=int, default=None,
                   help="number of sample blocks (default: sub-batches of ~50)")
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=None,
                   help="multiplier step (default 1/n, or 1/(4n) with --theorem-safe)")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--checkpoint-every", type=int, default=1)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--theorem-safe", action="store_true",
                   help="gamma = 1/(4n) and eta_Z above the linear-rate bound")
    p.add_argument("--solver", choices=("sdca", "batch"), default="sdca")
    p.add_argument("--loss", choices=[k.value for k in LossFamily],
                   default=LossFamily.SMOOTHED_HINGE.value)
    p.add_argument("--C1", type=float, default=None)
    p.add_argument("--C2", type=float, default=None)
    p.add_argument("--eps", type=float, default=None,
                   help="ridge factor of the elastic-net terms")
    p.add_argument("--no-wall-clock", action="store_true",
                   help="write 0 in wall_seconds so reruns are byte-identical")
    p.add_argument("--cache-dir", default=None,
                   help="directory caching reference optima across runs")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sdca-admm",
        description="SDCA-ADMM benchmark traces for structured sparse classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="overlapped group lasso on synthetic grid data")
    synth.add_argument("--rows", type=int, default=32)
    synth.add_argument("--cols", type=int, default=32)
    synth.add_argument("--n", type=int, default=512)
    synth.add_argument("--noise-sd", type=float, default=0.1)
    synth.add_argument("--test-n", type=int, default=None)
    _add_common(synth)

    graph = sub.add_parser("graph", help="graph-guided fused lasso on LIBSVM data")
    graph.add_argument("--train", required=True)
    graph.add_argument("--test", default=None)
    graph.add_argument("--edges", default="corr:0.5",
                       help="edge-list file or corr:<threshold>")
    graph.add_argument("--max-edges", type=int, default=None)
    _add_common(graph)
    return parser


def config_from_args(args):
    if args.command == "synth":
        problem = SyntheticGrid(args.rows, args.cols, args.n, args.noise_sd, args.test_n)
        n = args.n
        repeats = 10 if args.repeats is None else args.repeats
    else:
        problem = GraphGuided(args.train, args.test, args.edges, args.max_edges)
        n = None
        repeats = 5 if args.repeats is None else args.repeats
    K = args.K
    if K is None:
        if n is None:
            n = read_libsvm(args.train).sample_count
        K = default_K(n)
    solver = SolverConfig(
        rho=args.rho,
        gamma=args.gamma,
        K=K,
        max_epochs=args.epochs,
        eta_Z="theorem-safe" if args.theorem_safe else "default",
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
    )
    return ExperimentConfig(
        problem=problem,
        solver=solver,
        method=args.solver,
        loss=LossFamily(args.loss),
        C1=args.C1,
        C2=args.C2,
        eps=args.eps,
        repeats=repeats,
        output_path=args.out,
        record_wall_clock=not args.no_wall_clock,
        cache_dir=args.cache_dir,
    )


def _echo(config):
    d = asdict(config)
    d["problem"] = {"kind": type(config.problem).__name__, **d["problem"]}
    d["loss"] = config.loss.value
    return json.dumps(d, sort_keys=True, default=str)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        print(_echo(config), file=sys.stderr)
        trace_path, agg_path = run_experiment(config)
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"sdca-admm: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {trace_path} and {agg_path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
