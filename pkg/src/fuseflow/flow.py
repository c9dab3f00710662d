"""Exact minimum quadratic cost flow over a capacitated variable graph.

The problem: route antisymmetric flows xi over the edges of an undirected
graph, |xi_e| <= theta_e, minimizing 0.5 * ||z - s||^2 where s_i is the
net flow into node i. Shifting every node by gamma_i = max(|z_i|,
sum of incident theta) turns this into a nonnegative-capacity network
(source arcs gamma_i, inter-node capacities theta_e, quadratic sink
costs); both forms have identical objectives, so the solver works on z
directly and the network view is kept for inspection.

Algorithm: divide and conquer over a parametric minimum cut. A block of
nodes is split at the mean value m of its (adjusted) targets by one
max-flow whose maximal source side is exactly the set of nodes whose
optimal potential is >= m. Edges crossing the split are saturated in the
known direction, which shifts the remaining targets by +-theta; the two
sides recurse independently. A block terminates when the cut is trivial
(its potential is constant) and its residual imbalances are then routed
through the block's edges by one more max-flow, yielding explicit
per-edge flows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernel import get_kernel
from .errors import SolverError
from .graph import Graph, node_edge_weight_sums

_CAP_EPS_REL = 1e-12


@dataclass(frozen=True)
class FlowNetwork:
    """Capacitated network for the quadratic-cost flow problem.

    theta: per-edge capacity; gamma: per-node shift making all source
    injections nonnegative; y = z + gamma: shifted targets (all >= 0).
    """

    graph: Graph
    theta: np.ndarray
    gamma: np.ndarray
    y: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return self.y - self.gamma


@dataclass(frozen=True)
class FlowSolution:
    """Optimal flows for a FlowNetwork.

    xi[e] is the signed flow received by the lower-index endpoint of edge
    e (the upper endpoint receives -xi[e]). s is the per-node aggregate,
    dual_objective is 0.5 * ||z - s||^2.
    """

    xi: np.ndarray
    s: np.ndarray
    dual_objective: float


def build_network(z, g: Graph, theta) -> FlowNetwork:
    """Assemble the shifted network for targets z and edge capacities theta."""
    z = np.asarray(z, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if z.ndim != 1 or z.size != g.num_nodes:
        raise ValueError(f"z has shape {z.shape}, expected ({g.num_nodes},)")
    if theta.shape != (g.num_edges,):
        raise ValueError(
            f"theta has shape {theta.shape}, expected ({g.num_edges},)"
        )
    if theta.size and theta.min() < 0:
        raise ValueError("edge capacities must be nonnegative")
    gamma = np.maximum(np.abs(z), node_edge_weight_sums(g, theta))
    return FlowNetwork(graph=g, theta=theta, gamma=gamma, y=z + gamma)


def aggregate_flows(g: Graph, xi) -> np.ndarray:
    """Per-node net inflow implied by per-edge flows (antisymmetric)."""
    s = np.zeros(g.num_nodes)
    np.add.at(s, g.edge_i, xi)
    np.subtract.at(s, g.edge_j, xi)
    return s


def solve_quadratic_flow(net: FlowNetwork, tol: float, backend=None) -> FlowSolution:
    """Solve the minimum quadratic cost flow problem exactly (to tol).

    Returns flows minimizing 0.5 * ||z - s||^2 subject to the capacity
    constraints. Capacity feasibility of the output is exact; tol only
    controls when a block's residual potential spread is considered zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kernel = get_kernel(backend)
    g = net.graph
    z = net.y - net.gamma
    n = g.num_nodes
    ei, ej, theta = g.edge_i, g.edge_j, net.theta
    num_edges = g.num_edges

    xi = np.zeros(num_edges)
    if n == 0:
        return FlowSolution(xi=xi, s=np.zeros(0), dual_objective=0.0)

    zw = z.astype(np.float64).copy()
    spread_tol = tol * (1.0 + float(np.max(np.abs(z))))
    loc = np.empty(n, dtype=np.int32)
    side = np.zeros(n, dtype=bool)

    max_calls = 4 * n + 64
    calls = 0

    stack: list[tuple[np.ndarray, np.ndarray]] = [
        (np.arange(n, dtype=np.int64), np.arange(num_edges, dtype=np.int64))
    ]
    while stack:
        nodes, edges = stack.pop()
        nb = nodes.size
        if nb == 1:
            continue  # potential equals its adjusted target; no edges inside
        zb = zw[nodes]
        m = float(zb.mean())
        if float(zb.max() - zb.min()) <= spread_tol:
            calls += _route_block(kernel, nodes, edges, zb - m, ei, ej, theta, xi, loc)
            continue
        if calls >= max_calls:
            raise SolverError(
                "flow solver exceeded its max-flow call budget",
                best_s=aggregate_flows(g, xi),
                residual=float(zb.max() - zb.min()),
            )

        a = zb - m
        loc[nodes] = np.arange(nb, dtype=np.int32)
        le = loc[ei[edges]]
        lj = loc[ej[edges]]
        th = theta[edges]
        pos = np.nonzero(a > 0)[0].astype(np.int32)
        neg = np.nonzero(a < 0)[0].astype(np.int32)
        source, sink = nb, nb + 1
        tail, head, cap = _assemble_arcs(
            (le, lj, th),
            (np.full(pos.size, source, dtype=np.int32), pos, a[pos], 0.0),
            (neg, np.full(neg.size, sink, dtype=np.int32), -a[neg], 0.0),
        )
        eps = _CAP_EPS_REL * max(1.0, float(cap.max())) if cap.size else _CAP_EPS_REL
        _, reach_sink = kernel.max_flow(nb + 2, tail, head, cap, source, sink, eps)
        calls += 1
        in_s = reach_sink[:nb] == 0  # maximal source side of the min cut

        if in_s.all() or not in_s.any():
            calls += _route_block(kernel, nodes, edges, zb - m, ei, ej, theta, xi, loc)
            continue

        side[nodes] = in_s
        si = side[ei[edges]]
        sj = side[ej[edges]]
        cross = si != sj
        ecross = edges[cross]
        if ecross.size:
            up = np.where(si[cross], 1.0, -1.0)
            xi[ecross] = up * theta[ecross]
            hi = np.where(si[cross], ei[ecross], ej[ecross])
            lo = np.where(si[cross], ej[ecross], ei[ecross])
            np.subtract.at(zw, hi, theta[ecross])
            np.add.at(zw, lo, theta[ecross])
        stack.append((nodes[in_s], edges[si & sj]))
        stack.append((nodes[~in_s], edges[~si & ~sj]))

    s = aggregate_flows(g, xi)
    dual_objective = 0.5 * float(np.sum((z - s) ** 2))
    return FlowSolution(xi=xi, s=s, dual_objective=dual_objective)


def _assemble_arcs(*groups):
    """Interleave arc groups into reverse pairs (arc k's reverse is k^1).

    Each group is (tails, heads, caps) or (tails, heads, caps, reverse_caps);
    undirected edges pass equal capacities both ways, terminal arcs pass 0
    for the reverse direction.
    """
    parts_t, parts_h, parts_c = [], [], []
    for group in groups:
        t, h, c = group[:3]
        rc = group[3] if len(group) == 4 else c
        k = len(t)
        tt = np.empty(2 * k, dtype=np.int32)
        hh = np.empty(2 * k, dtype=np.int32)
        cc = np.empty(2 * k, dtype=np.float64)
        tt[0::2], tt[1::2] = t, h
        hh[0::2], hh[1::2] = h, t
        cc[0::2], cc[1::2] = c, rc
        parts_t.append(tt)
        parts_h.append(hh)
        parts_c.append(cc)
    return (
        np.concatenate(parts_t) if parts_t else np.zeros(0, np.int32),
        np.concatenate(parts_h) if parts_h else np.zeros(0, np.int32),
        np.concatenate(parts_c) if parts_c else np.zeros(0, np.float64),
    )


def _route_block(kernel, nodes, edges, resid, ei, ej, theta, xi, loc):
    """Distribute a constant-potential block's imbalances over its edges.

    resid[i] is the net inflow node i must receive. Fills xi for the
    block's edges; returns the number of kernel calls made.
    """
    if edges.size == 0 or not np.any(resid):
        return 0
    nb = nodes.size
    loc[nodes] = np.arange(nb, dtype=np.int32)
    le = loc[ei[edges]]
    lj = loc[ej[edges]]
    th = theta[edges]
    recv = np.nonzero(resid > 0)[0].astype(np.int32)
    send = np.nonzero(resid < 0)[0].astype(np.int32)
    source, sink = nb, nb + 1
    tail, head, cap = _assemble_arcs(
        (le, lj, th),
        (np.full(send.size, source, dtype=np.int32), send, -resid[send], 0.0),
        (recv, np.full(recv.size, sink, dtype=np.int32), resid[recv], 0.0),
    )
    eps = _CAP_EPS_REL * max(1.0, float(cap.max())) if cap.size else _CAP_EPS_REL
    kernel.max_flow(nb + 2, tail, head, cap, source, sink, eps)
    # arc 2q is the low->high direction of block edge q; net flow pushed
    # low->high is theta - rescap, received by the high endpoint.
    xi[edges] = cap[0 : 2 * edges.size : 2] - th
    return 1


def as_debug_dict(net: FlowNetwork, sol: FlowSolution | None = None) -> dict:
    """JSON-ready dump of a network (and optionally its solution)."""
    g = net.graph
    out = {
        "num_nodes": g.num_nodes,
        "edges": [
            {"i": int(i), "j": int(j), "theta": float(t)}
            for i, j, t in zip(g.edge_i, g.edge_j, net.theta)
        ],
        "gamma": net.gamma.tolist(),
        "y": net.y.tolist(),
        "z": net.z.tolist(),
    }
    if sol is not None:
        out["xi"] = sol.xi.tolist()
        out["s"] = sol.s.tolist()
        out["dual_objective"] = sol.dual_objective
    return out
