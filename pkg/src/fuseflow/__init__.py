"""Sparse regression with graph fusion penalties.

Solves sign-constrained fused-lasso problems (sparsity plus l1 penalties
on adjacent-variable differences over a graph) with an accelerated
proximal-gradient outer loop whose inner step is exact: the
total-variation prox is computed as a minimum quadratic cost network
flow, then soft-thresholded and clamped element-wise.
"""

__version__ = "0.1.0"

from ._kernel import available_backends, default_backend, set_default_backend
from .errors import SolverError, UndefinedMetricError
from .flow import (
    FlowNetwork,
    FlowSolution,
    aggregate_flows,
    build_network,
    solve_quadratic_flow,
)
from .fusedprox import KktReport, ProxInstance, check_kkt, fused_prox, support
from .graph import (
    Graph,
    grid_graph_2d,
    grid_graph_3d,
    read_edge_list,
    validate,
    write_edge_list,
)
from .solver import (
    FitResult,
    Problem,
    SolverConfig,
    estimate_lipschitz,
    fit,
    logistic_loss_grad,
    objective,
    squared_loss_grad,
)
from .stability import StabilityInput, estimation_stability, multiset_dice
from .tvprox import TvInstance, tv_duality_gap, tv_objective, tv_prox

__all__ = [
    "__version__",
    "available_backends",
    "default_backend",
    "set_default_backend",
    "SolverError",
    "UndefinedMetricError",
    "FlowNetwork",
    "FlowSolution",
    "aggregate_flows",
    "build_network",
    "solve_quadratic_flow",
    "KktReport",
    "ProxInstance",
    "check_kkt",
    "fused_prox",
    "support",
    "Graph",
    "grid_graph_2d",
    "grid_graph_3d",
    "read_edge_list",
    "validate",
    "write_edge_list",
    "FitResult",
    "Problem",
    "SolverConfig",
    "estimate_lipschitz",
    "fit",
    "logistic_loss_grad",
    "objective",
    "squared_loss_grad",
    "StabilityInput",
    "estimation_stability",
    "multiset_dice",
    "TvInstance",
    "tv_duality_gap",
    "tv_objective",
    "tv_prox",
]
