"""Command-line entry point.

Subcommands: synth, fit, prox, tvprox, benchmark, cv, stability. All
reports are machine-readable (JSON, plus CSV where tabular) and embed a
run manifest: the resolved configuration, SHA-256 digests of every input
file, the tool version and the wall time, so any report can be
reproduced from itself.

CSV conventions: vectors are one value per line; matrices are d rows of
N comma-separated values; no header row unless --header is passed (which
skips one line on input). Exit codes: 0 success, 1 usage or input error,
2 numerical/solver failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, _kernel
from .errors import SolverError
from .flow import as_debug_dict, build_network, solve_quadratic_flow
from .fusedprox import MODES, ProxInstance, check_kkt, fused_prox
from .graph import read_edge_list, write_edge_list
from .oracle import PROX_ORACLE_MAX_DIM, prox_oracle
from .solver import (
    ACCEL_MODES,
    LIPSCHITZ_MODES,
    LOSSES,
    Problem,
    SolverConfig,
    fit,
    fit_kkt_report,
)
from .stability import StabilityInput, estimation_stability, multiset_dice
from .experiments import (
    MODELS,
    SyntheticSpec,
    classification_labels,
    cross_validate,
    gen_synthetic,
    run_benchmark,
)
from .tvprox import TvInstance, tv_prox


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest(subcommand, args, inputs, started) -> dict:
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func",)
    }
    return {
        "subcommand": subcommand,
        "config": config,
        "input_digests": {str(p): _sha256(p) for p in inputs},
        "tool_version": __version__,
        "wall_time_s": time.perf_counter() - started,
    }


def _read_vector(path, header=False) -> np.ndarray:
    v = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=1)
    return np.asarray(v, dtype=np.float64).ravel()


def _read_matrix(path, header=False) -> np.ndarray:
    m = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    return np.asarray(m, dtype=np.float64)


def _write_vector(path, v):
    np.savetxt(path, np.asarray(v).ravel(), fmt="%.17g")


def _write_matrix(path, m):
    np.savetxt(path, np.asarray(m), delimiter=",", fmt="%.17g")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        max_iters=args.max_iters,
        tol=args.tol,
        lipschitz=args.lipschitz,
        accel=args.accel,
        prox_tol=args.prox_tol,
        seed=args.seed,
    )


def _add_solver_flags(sub, tol_default=1e-6):
    sub.add_argument("--tol", type=float, default=tol_default)
    sub.add_argument("--max-iters", type=int, default=2000)
    sub.add_argument("--prox-tol", type=float, default=1e-9)
    sub.add_argument("--accel", choices=ACCEL_MODES, default="fista")
    sub.add_argument("--lipschitz", choices=LIPSCHITZ_MODES, default="spectral")
    sub.add_argument("--seed", type=int, default=0)


def _default_jobs() -> int:
    env = os.environ.get("FUSEFLOW_JOBS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _parse_grid(text):
    """Parse 'l1a:l1b:steps,l2a:l2b:steps' into the cross product grid."""

    def axis(spec):
        parts = spec.split(":")
        if len(parts) != 3:
            raise _UsageError(f"bad grid axis {spec!r}, expected lo:hi:steps")
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        if steps < 1:
            raise _UsageError("grid steps must be at least 1")
        return np.linspace(lo, hi, steps)

    chunks = text.split(",")
    if len(chunks) != 2:
        raise _UsageError("grid must be 'l1a:l1b:steps,l2a:l2b:steps'")
    l1s, l2s = axis(chunks[0]), axis(chunks[1])
    return [(float(a), float(b)) for a in l1s for b in l2s]


def _cmd_synth(args, started):
    spec = SyntheticSpec(
        d=args.d,
        n_samples=args.n_samples,
        noise=args.noise,
        beta_kind=args.beta_kind,
        seed=args.seed,
    )
    X, y, graph, beta = gen_synthetic(spec)
    if args.classification:
        y = classification_labels(y)
    os.makedirs(args.out_dir, exist_ok=True)
    prefix = os.path.join(args.out_dir, args.prefix)
    _write_matrix(prefix + "_x.csv", X)
    _write_vector(prefix + "_y.csv", y)
    _write_vector(prefix + "_beta.csv", beta)
    write_edge_list(graph, prefix + "_graph.txt")
    _write_json(prefix + "_manifest.json", _manifest("synth", args, [], started))
    return 0


def _cmd_fit(args, started):
    X = _read_matrix(args.x, args.header)
    y = _read_vector(args.y, args.header)
    graph = read_edge_list(args.graph)
    problem = Problem(
        X=X,
        y=y,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        graph=graph,
        loss=args.loss,
        constraint=args.mode,
    )
    cfg = _solver_config(args)
    result = fit(problem, cfg)
    kkt, bias_grad = fit_kkt_report(problem, result.beta, result.bias)
    payload = {
        "beta": result.beta.tolist(),
        "bias": result.bias,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_l": result.final_l,
        "objective_trace": result.objective_trace,
        "kkt": {
            "max_stationarity_residual": kkt.max_stationarity_residual,
            "complementarity_violation": kkt.complementarity_violation,
            "feasibility_violation": kkt.feasibility_violation,
            "bias_gradient": bias_grad,
        },
    }
    if args.verify:
        d = X.shape[0]
        if d > PROX_ORACLE_MAX_DIM:
            raise ValueError(
                f"--verify is limited to d <= {PROX_ORACLE_MAX_DIM} (got {d})"
            )
        from .solver import logistic_loss_grad, squared_loss_grad

        if problem.loss == "logistic":
            _, grad, _ = logistic_loss_grad(result.beta, result.bias, X, y)
        else:
            _, grad = squared_loss_grad(result.beta, X, y)
        inst = ProxInstance(
            z=result.beta - grad,
            graph=graph,
            theta_node=args.lambda1,
            theta_edge=args.lambda2 * graph.weight,
            constraint=args.mode,
        )
        ours = fused_prox(inst, cfg.prox_tol)
        ref = prox_oracle(inst)
        payload["verify"] = {
            "prox_vs_oracle_max_diff": float(np.max(np.abs(ours - ref), initial=0.0)),
            "fixed_point_gap": float(np.max(np.abs(ours - result.beta), initial=0.0)),
        }
    payload["manifest"] = _manifest(
        "fit", args, [args.x, args.y, args.graph], started
    )
    _write_json(args.out, payload)
    return 0


def _cmd_prox(args, started):
    z = _read_vector(args.z, args.header)
    graph = read_edge_list(args.graph)
    inst = ProxInstance(
        z=z,
        graph=graph,
        theta_node=args.lambda1,
        theta_edge=args.lambda2 * graph.weight,
        constraint=args.mode,
    )
    beta = fused_prox(inst, args.tol)
    kkt = check_kkt(beta, inst, 10.0 * args.tol)
    payload = {
        "beta": beta.tolist(),
        "kkt": {
            "max_stationarity_residual": kkt.max_stationarity_residual,
            "complementarity_violation": kkt.complementarity_violation,
            "feasibility_violation": kkt.feasibility_violation,
        },
    }
    if args.verify:
        if z.size > PROX_ORACLE_MAX_DIM:
            raise ValueError(
                f"--verify is limited to d <= {PROX_ORACLE_MAX_DIM} (got {z.size})"
            )
        ref = prox_oracle(inst)
        payload["verify"] = {
            "prox_vs_oracle_max_diff": float(np.max(np.abs(beta - ref), initial=0.0))
        }
    if args.dump_network:
        tv_z = -z if args.mode == "nonpositive" else z
        net = build_network(tv_z, graph, inst.theta_edge)
        sol = solve_quadratic_flow(net, args.tol)
        _write_json(args.dump_network, as_debug_dict(net, sol))
    payload["manifest"] = _manifest("prox", args, [args.z, args.graph], started)
    _write_json(args.out, payload)
    return 0


def _cmd_tvprox(args, started):
    z = _read_vector(args.z, args.header)
    graph = read_edge_list(args.graph)
    inst = TvInstance(z=z, graph=graph, theta=args.lambda2 * graph.weight)
    beta = tv_prox(inst, args.tol)
    _write_vector(args.out, beta)
    if args.dump_network:
        net = build_network(z, graph, inst.theta)
        sol = solve_quadratic_flow(net, args.tol)
        _write_json(args.dump_network, as_debug_dict(net, sol))
    _write_json(
        args.out + ".manifest.json",
        _manifest("tvprox", args, [args.z, args.graph], started),
    )
    return 0


def _cmd_benchmark(args, started):
    dims = [int(tok) for tok in args.dims.split(",") if tok]
    if not dims:
        raise _UsageError("--dims must list at least one dimension")
    cfg = _solver_config(args)
    if args.backend == "both":
        backends = list(_kernel.available_backends())
    else:
        backends = [args.backend]
    rows = []
    for backend in backends:
        name = None if backend == "auto" else backend
        report = run_benchmark(
            dims, cfg, trials=args.trials, seed=args.seed, backend=name
        )
        rows.extend(report.as_dicts())
    payload = {
        "rows": rows,
        "manifest": _manifest("benchmark", args, [], started),
    }
    _write_json(args.out + ".json", payload)
    cols = [
        "backend",
        "d",
        "n_samples",
        "lambda1",
        "lambda2",
        "median_seconds",
        "iterations",
        "converged",
        "error",
        "trial_seconds",
    ]
    with open(args.out + ".csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for col in cols:
                val = row[col]
                if col == "trial_seconds":
                    val = ";".join(f"{t:.6f}" for t in val)
                cells.append("" if val is None else str(val))
            fh.write(",".join(cells) + "\n")
    return 0


def _cmd_cv(args, started):
    X = _read_matrix(args.x, args.header)
    y = _read_vector(args.y, args.header)
    graph = read_edge_list(args.graph)
    grid = _parse_grid(args.grid)
    cfg = _solver_config(args)
    report = cross_validate(
        X,
        y,
        graph,
        folds=args.folds,
        grid=grid,
        model=args.model,
        cfg=cfg,
        seed=args.seed,
        jobs=args.jobs,
    )
    payload = {
        "model": report.model,
        "lambda1": report.lambda1,
        "lambda2": report.lambda2,
        "accuracy": report.accuracy,
        "es": report.es,
        "mdc": report.mdc,
        "fold_summaries": report.fold_summaries,
        "grid_accuracies": report.grid_accuracies,
        "manifest": _manifest("cv", args, [args.x, args.y, args.graph], started),
    }
    _write_json(args.out, payload)
    return 0


def _cmd_stability(args, started):
    paths = [p for p in args.betas.split(",") if p]
    if len(paths) < 2:
        raise _UsageError("--betas needs at least two comma-separated files")
    betas = np.vstack([_read_vector(p, args.header) for p in paths])
    X = _read_matrix(args.x, args.header)
    inp = StabilityInput(X=X, betas=betas)
    payload = {
        "es": estimation_stability(inp),
        "mdc": multiset_dice([set(np.nonzero(b != 0)[0].tolist()) for b in betas]),
        "support_sizes": [int(np.count_nonzero(b)) for b in betas],
        "manifest": _manifest("stability", args, paths + [args.x], started),
    }
    if args.out:
        _write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="fuseflow", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("synth", help="generate a synthetic grid instance")
    sub.add_argument("--d", type=int, required=True, help="node count (perfect square)")
    sub.add_argument("--n-samples", type=int, default=None)
    sub.add_argument("--noise", type=float, default=0.01)
    sub.add_argument(
        "--beta-kind",
        choices=("gaussian-random", "piecewise-nonnegative"),
        default="gaussian-random",
    )
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument(
        "--classification",
        action="store_true",
        help="emit balanced +-1 labels instead of regression targets",
    )
    sub.add_argument("--out-dir", required=True)
    sub.add_argument("--prefix", default="synth")
    sub.set_defaults(func=_cmd_synth)

    sub = subs.add_parser("fit", help="fit a fused model")
    sub.add_argument("--x", required=True, help="design CSV, d rows x N columns")
    sub.add_argument("--y", required=True, help="targets/labels CSV, one per line")
    sub.add_argument("--graph", required=True, help="edge-list file")
    sub.add_argument("--lambda1", type=float, required=True)
    sub.add_argument("--lambda2", type=float, required=True)
    sub.add_argument("--loss", choices=LOSSES, default="logistic")
    sub.add_argument("--mode", choices=MODES, default="nonnegative")
    _add_solver_flags(sub)
    sub.add_argument("--header", action="store_true", help="inputs carry a header row")
    sub.add_argument(
        "--verify",
        action="store_true",
        help="cross-check the solution against the QP oracle (small d only)",
    )
    sub.add_argument("--out", required=True, help="result JSON path")
    sub.set_defaults(func=_cmd_fit)

    sub = subs.add_parser("prox", help="fused prox of a vector")
    sub.add_argument("--z", required=True, help="input vector CSV")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--lambda1", type=float, required=True)
    sub.add_argument("--lambda2", type=float, required=True)
    sub.add_argument("--mode", choices=MODES, default="nonnegative")
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--header", action="store_true")
    sub.add_argument("--verify", action="store_true")
    sub.add_argument(
        "--dump-network",
        default=None,
        help="write the TV-stage flow network and solution as JSON",
    )
    sub.add_argument("--out", required=True, help="output JSON path")
    sub.set_defaults(func=_cmd_prox)

    sub = subs.add_parser("tvprox", help="graph total-variation prox of a vector")
    sub.add_argument("--z", required=True)
    sub.add_argument("--graph", required=True)
    sub.add_argument("--lambda2", type=float, required=True)
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--header", action="store_true")
    sub.add_argument("--dump-network", default=None)
    sub.add_argument("--out", required=True, help="output CSV path")
    sub.set_defaults(func=_cmd_tvprox)

    sub = subs.add_parser("benchmark", help="scaling benchmark on synthetic data")
    sub.add_argument("--dims", required=True, help="comma-separated node counts")
    sub.add_argument("--trials", type=int, default=1)
    _add_solver_flags(sub, tol_default=1e-5)
    sub.add_argument(
        "--backend",
        choices=("auto", "python", "compiled", "both"),
        default="auto",
        help="flow kernel to time ('both' compares the implementations)",
    )
    sub.add_argument("--out", required=True, help="output path prefix (.json/.csv)")
    sub.set_defaults(func=_cmd_benchmark)

    sub = subs.add_parser("cv", help="cross-validated grid search with stability")
    sub.add_argument("--x", required=True)
    sub.add_argument("--y", required=True, help="labels in {-1,+1}")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--folds", type=int, default=10)
    sub.add_argument(
        "--grid", required=True, help="'l1a:l1b:steps,l2a:l2b:steps' (linear spacing)"
    )
    sub.add_argument("--model", choices=MODELS, required=True)
    sub.add_argument(
        "--jobs",
        type=int,
        default=_default_jobs(),
        help="worker processes (default from FUSEFLOW_JOBS, else 1)",
    )
    _add_solver_flags(sub)
    sub.add_argument("--header", action="store_true")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_cv)

    sub = subs.add_parser("stability", help="ES and mDC of per-fold coefficients")
    sub.add_argument(
        "--betas", required=True, help="comma-separated coefficient CSV files"
    )
    sub.add_argument("--x", required=True, help="full design CSV")
    sub.add_argument("--header", action="store_true")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=_cmd_stability)

    return parser


def main(argv=None) -> int:
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"fuseflow: usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    name = args.subcommand
    try:
        return args.func(args, started)
    except _UsageError as exc:
        print(f"fuseflow {name}: usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"fuseflow {name}: input error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"fuseflow {name}: solver failure: {exc}", file=sys.stderr)
        return 2


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
