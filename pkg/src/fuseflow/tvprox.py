"""Graph total-variation proximal operator via the flow dual.

tv_prox solves min_b 0.5 * ||b - z||^2 + sum_e theta_e |b_i - b_j| by
solving the equivalent capacitated flow problem and recovering the
primal as b = z - s, where s aggregates the optimal edge flows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import FlowSolution, aggregate_flows, build_network, solve_quadratic_flow
from .graph import Graph


@dataclass(frozen=True)
class TvInstance:
    z: np.ndarray
    graph: Graph
    theta: np.ndarray  # per-edge, >= 0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        theta = np.asarray(self.theta, dtype=np.float64)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "theta", theta)
        if z.ndim != 1 or z.size != self.graph.num_nodes:
            raise ValueError(
                f"z has shape {z.shape}, expected ({self.graph.num_nodes},)"
            )
        if theta.shape != (self.graph.num_edges,):
            raise ValueError(
                f"theta has shape {theta.shape}, expected ({self.graph.num_edges},)"
            )
        if theta.size and theta.min() < 0:
            raise ValueError("theta must be nonnegative")


def tv_prox(inst: TvInstance, tol: float, backend=None) -> np.ndarray:
    """Minimizer of the total-variation proximal problem, to within tol."""
    sol = solve_quadratic_flow(
        build_network(inst.z, inst.graph, inst.theta), tol, backend=backend
    )
    return inst.z - sol.s


def tv_prox_with_flows(
    inst: TvInstance, tol: float, backend=None
) -> tuple[np.ndarray, FlowSolution]:
    """tv_prox plus the underlying flow solution (for certificates)."""
    sol = solve_quadratic_flow(
        build_network(inst.z, inst.graph, inst.theta), tol, backend=backend
    )
    return inst.z - sol.s, sol


def tv_objective(beta, inst: TvInstance) -> float:
    """0.5 * ||beta - z||^2 + sum_e theta_e |beta_i - beta_j|."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != inst.z.shape:
        raise ValueError(f"beta has shape {beta.shape}, expected {inst.z.shape}")
    g = inst.graph
    diffs = beta[g.edge_i] - beta[g.edge_j]
    return 0.5 * float(np.sum((beta - inst.z) ** 2)) + float(
        np.sum(inst.theta * np.abs(diffs))
    )


def tv_duality_gap(
    beta, sol: FlowSolution, inst: TvInstance, feas_tol: float = 1e-9
) -> float:
    """Primal objective at beta minus the dual objective of a feasible flow.

    The dual value of a flow with aggregate s is 0.5*||z||^2 - 0.5*||z - s||^2;
    the gap is nonnegative for every primal/feasible-dual pair and zero
    exactly at an optimal pair.
    """
    over = np.abs(sol.xi) - inst.theta
    if over.size and float(over.max()) > feas_tol:
        e = int(np.argmax(over))
        raise ValueError(
            f"flow is infeasible: |xi[{e}]| exceeds theta[{e}] by {over[e]:.3e}"
        )
    s = aggregate_flows(inst.graph, sol.xi)
    dual = 0.5 * float(np.sum(inst.z**2)) - 0.5 * float(np.sum((inst.z - s) ** 2))
    return tv_objective(beta, inst) - dual
