"""Synthetic data, the scaling benchmark, and cross-validated stability runs."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .graph import Graph, grid_graph_2d
from .solver import FitResult, Problem, SolverConfig, fit
from .stability import StabilityInput, estimation_stability, multiset_dice, supports_of

MODELS = ("lasso", "gfl", "n2gfl")


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted-coefficient regression instance on a 2D grid."""

    d: int
    n_samples: int | None = None
    noise: float = 0.01
    beta_kind: str = "gaussian-random"
    seed: int = 0

    def __post_init__(self):
        side = math.isqrt(self.d)
        if self.d < 4 or side * side != self.d:
            raise ValueError("d must be a perfect square >= 4 for a 2D grid")
        if self.resolved_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.beta_kind not in ("gaussian-random", "piecewise-nonnegative"):
            raise ValueError(f"unknown beta_kind {self.beta_kind!r}")

    @property
    def resolved_samples(self) -> int:
        return self.d // 2 if self.n_samples is None else self.n_samples


def _piecewise_beta(rng, side: int) -> np.ndarray:
    """A few constant rectangular patches with nonnegative values, rest zero."""
    plane = np.zeros((side, side))
    for _ in range(3):
        h = int(rng.integers(2, max(3, side // 4) + 1))
        w = int(rng.integers(2, max(3, side // 4) + 1))
        r0 = int(rng.integers(0, side - h + 1))
        c0 = int(rng.integers(0, side - w + 1))
        plane[r0 : r0 + h, c0 : c0 + w] = float(rng.uniform(0.5, 2.0))
    return plane.ravel()


def gen_synthetic(spec: SyntheticSpec):
    """Deterministic synthetic instance: (X, y, graph, true_beta).

    X columns are i.i.d. standard normal samples; y = X^T beta + noise * n
    with standard normal n.
    """
    rng = np.random.default_rng(spec.seed)
    side = math.isqrt(spec.d)
    graph = grid_graph_2d(side, side)
    if spec.beta_kind == "gaussian-random":
        beta = rng.standard_normal(spec.d)
    else:
        beta = _piecewise_beta(rng, side)
    n = spec.resolved_samples
    X = rng.standard_normal((spec.d, n))
    y = X.T @ beta + spec.noise * rng.standard_normal(n)
    return X, y, graph, beta


def classification_labels(scores) -> np.ndarray:
    """Balanced +-1 labels by thresholding scores at their median.

    Rank-based: the upper half (by value, ties broken by index) gets +1,
    so classes are balanced within one sample.
    """
    scores = np.asarray(scores)
    labels = -np.ones(scores.size)
    order = np.argsort(scores, kind="stable")
    labels[order[scores.size // 2 :]] = 1.0
    return labels


def default_benchmark_penalty(X, y) -> float:
    """Documented default for the scaling benchmark: 0.1 * ||X y||_inf / N."""
    return 0.1 * float(np.max(np.abs(X @ y))) / y.size


@dataclass
class BenchmarkRow:
    d: int
    n_samples: int
    lambda1: float
    lambda2: float
    trial_seconds: list[float]
    median_seconds: float
    iterations: int
    converged: bool
    backend: str
    error: str | None = None


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow] = field(default_factory=list)

    def as_dicts(self) -> list[dict]:
        return [vars(r) for r in self.rows]


def run_benchmark(
    dims,
    cfg: SolverConfig,
    trials: int = 1,
    seed: int = 0,
    backend: str | None = None,
) -> BenchmarkReport:
    """Time nonnegative fused fits on squared-loss synthetic instances.

    One row per dimension; failures are recorded per cell rather than
    aborting the sweep.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    backend_name = backend or _kernel.default_backend()
    report = BenchmarkReport()
    for d in dims:
        spec = SyntheticSpec(d=int(d), seed=seed + int(d))
        X, y, graph, _ = gen_synthetic(spec)
        lam = default_benchmark_penalty(X, y)
        problem = Problem(
            X=X,
            y=y,
            lambda1=lam,
            lambda2=lam,
            graph=graph,
            loss="squared",
            constraint="nonnegative",
        )
        row = BenchmarkRow(
            d=int(d),
            n_samples=spec.resolved_samples,
            lambda1=lam,
            lambda2=lam,
            trial_seconds=[],
            median_seconds=float("nan"),
            iterations=0,
            converged=False,
            backend=backend_name,
        )
        previous = _kernel.set_default_backend(backend_name)
        try:
            for _ in range(trials):
                start = time.perf_counter()
                result = fit(problem, cfg)
                row.trial_seconds.append(time.perf_counter() - start)
                row.iterations = result.iterations
                row.converged = result.converged
            row.median_seconds = float(np.median(row.trial_seconds))
        except Exception as exc:  # noqa: BLE001 - per-cell failures are reported
            row.error = f"{type(exc).__name__}: {exc}"
        finally:
            _kernel.set_default_backend(previous)
        report.rows.append(row)
    return report


@dataclass
class CvReport:
    model: str
    lambda1: float
    lambda2: float
    accuracy: float
    es: float
    mdc: float
    fold_summaries: list[dict]
    grid_accuracies: list[dict]


def stratified_folds(labels, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified K-fold partition of sample indices.

    Within each class, indices are shuffled then dealt round-robin, so
    per-class counts across folds differ by at most one.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise ValueError("folds must be at least 2")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    offset = 0
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        idx = idx[rng.permutation(idx.size)]
        for pos, sample in enumerate(idx):
            buckets[(pos + offset) % folds].append(int(sample))
        offset += idx.size % folds
    return [np.sort(np.array(b, dtype=np.int64)) for b in buckets]


def _model_settings(model: str, lambda1: float, lambda2: float):
    if model == "lasso":
        return lambda1, 0.0, "unconstrained"
    if model == "gfl":
        return lambda1, lambda2, "unconstrained"
    if model == "n2gfl":
        return lambda1, lambda2, "nonnegative"
    raise ValueError(f"model must be one of {MODELS}")


def _fit_fold(payload) -> FitResult:
    X, y, graph, l1, l2, constraint, cfg = payload
    problem = Problem(
        X=X,
        y=y,
        lambda1=l1,
        lambda2=l2,
        graph=graph,
        loss="logistic",
        constraint=constraint,
    )
    return fit(problem, cfg)


def cross_validate(
    X,
    y,
    graph: Graph,
    folds: int,
    grid,
    model: str,
    cfg: SolverConfig,
    seed: int = 0,
    jobs: int = 1,
) -> CvReport:
    """Grid-searched stratified CV with stability metrics at the chosen point.

    Selects the grid point with the best mean held-out accuracy (ties go
    to smaller lambda1, then smaller lambda2) and reports accuracy, ES
    and mDC computed from the per-fold coefficient vectors at that point.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    grid = [(float(l1), float(l2)) for l1, l2 in grid]
    if not grid:
        raise ValueError("grid must contain at least one (lambda1, lambda2) point")
    fold_idx = stratified_folds(y, folds, seed)
    all_idx = np.arange(y.size)
    for k, test in enumerate(fold_idx):
        train = np.setdiff1d(all_idx, test)
        if np.unique(y[test]).size < 2 or np.unique(y[train]).size < 2:
            raise ValueError(f"fold {k} is degenerate: a split sees a single class")

    tasks = []
    for l1, l2 in grid:
        el1, el2, constraint = _model_settings(model, l1, l2)
        for test in fold_idx:
            train = np.setdiff1d(all_idx, test)
            tasks.append((X[:, train], y[train], graph, el1, el2, constraint, cfg))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fit_fold, tasks))
    else:
        results = [_fit_fold(t) for t in tasks]

    grid_accuracies = []
    best = None
    for gi, (l1, l2) in enumerate(grid):
        accs = []
        for k, test in enumerate(fold_idx):
            res = results[gi * folds + k]
            scores = X[:, test].T @ res.beta + res.bias
            pred = np.where(scores >= 0, 1.0, -1.0)
            accs.append(float(np.mean(pred == y[test])))
        mean_acc = float(np.mean(accs))
        grid_accuracies.append({"lambda1": l1, "lambda2": l2, "accuracy": mean_acc})
        key = (-mean_acc, l1, l2)
        if best is None or key < best[0]:
            best = (key, gi, accs)

    _, gi, accs = best
    l1, l2 = grid[gi]
    chosen = results[gi * folds : (gi + 1) * folds]
    betas = np.vstack([r.beta for r in chosen])
    es = estimation_stability(StabilityInput(X=X, betas=betas))
    mdc = multiset_dice(supports_of(betas))
    fold_summaries = [
        {
            "fold": k,
            "accuracy": accs[k],
            "iterations": r.iterations,
            "converged": r.converged,
            "support_size": int(np.count_nonzero(r.beta)),
            "objective": r.objective_trace[-1],
        }
        for k, r in enumerate(chosen)
    ]
    return CvReport(
        model=model,
        lambda1=l1,
        lambda2=l2,
        accuracy=float(np.mean(accs)),
        es=es,
        mdc=mdc,
        fold_summaries=fold_summaries,
        grid_accuracies=grid_accuracies,
    )
