"""Slow, independent reference solvers used for cross-checking.

Nothing here shares code with the production path (flow decomposition +
thresholding); these exist so every fast answer can be validated against
a method of a completely different family:

- prox_oracle: the constrained fused prox as an interior-point QP.
- dual_flow_oracle: the capacitated flow dual by accelerated projected
  gradient on the per-edge box.
- mnp_oracle: projection onto the cut-function base polytope by Wolfe's
  min-norm-point method with the greedy linear-minimization oracle.
- finite_diff_grad / least_squares_ref: calculus and algebra anchors.

They are shipped (not test-only) so the CLI --verify flags can reproduce
every cross-check on user instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .fusedprox import ProxInstance
from .graph import Graph

PROX_ORACLE_MAX_DIM = 15
MNP_ORACLE_MAX_DIM = 25


def prox_oracle(inst: ProxInstance) -> np.ndarray:
    """Solve the constrained fused prox directly as a QP.

    Variables (b, a, t) with a >= |b| elementwise and t_e >= |b_i - b_j|;
    minimize 0.5*||b - z||^2 + theta_node * sum(a) + sum(theta_edge * t).
    Solved by cvxopt's interior-point method at tight tolerance; a tiny
    ridge on (a, t) keeps the KKT system nonsingular without moving the
    minimizer (a and t sit on their lower bounds at any optimum).
    """
    from cvxopt import matrix, solvers

    d = inst.z.size
    if d > PROX_ORACLE_MAX_DIM:
        raise ValueError(
            f"prox_oracle supports at most {PROX_ORACLE_MAX_DIM} variables, got {d}"
        )
    g = inst.graph
    ne = g.num_edges
    n = d + d + ne
    ridge = 1e-10

    P = np.zeros((n, n))
    P[:d, :d] = np.eye(d)
    P[d:, d:] = ridge * np.eye(d + ne)
    q = np.concatenate(
        [-inst.z, np.full(d, float(inst.theta_node)), inst.theta_edge]
    )

    rows = []

    def constraint(idx_coeffs, bound_idx):
        row = np.zeros(n)
        for idx, coef in idx_coeffs:
            row[idx] = coef
        row[bound_idx] = -1.0
        rows.append(row)

    for i in range(d):
        constraint([(i, 1.0)], d + i)
        constraint([(i, -1.0)], d + i)
    for e in range(ne):
        i, j = int(g.edge_i[e]), int(g.edge_j[e])
        constraint([(i, 1.0), (j, -1.0)], 2 * d + e)
        constraint([(i, -1.0), (j, 1.0)], 2 * d + e)
    if inst.constraint == "nonnegative":
        for i in range(d):
            row = np.zeros(n)
            row[i] = -1.0
            rows.append(row)
    elif inst.constraint == "nonpositive":
        for i in range(d):
            row = np.zeros(n)
            row[i] = 1.0
            rows.append(row)

    G = np.vstack(rows)
    h = np.zeros(G.shape[0])
    options = {
        "show_progress": False,
        "abstol": 1e-12,
        "reltol": 1e-12,
        "feastol": 1e-10,
        "maxiters": 200,
    }
    sol = solvers.qp(
        matrix(P), matrix(q), matrix(G), matrix(h), options=options
    )
    if sol["status"] not in ("optimal", "unknown"):
        raise SolverError(f"prox oracle QP failed with status {sol['status']}")
    beta = np.array(sol["x"]).ravel()[:d]
    if inst.constraint == "nonnegative":
        beta = np.maximum(beta, 0.0)
    elif inst.constraint == "nonpositive":
        beta = np.minimum(beta, 0.0)
    return beta


def dual_flow_oracle(
    z, g: Graph, theta, max_iters: int = 200000, rel_change_tol: float = 1e-15
):
    """First-order reference for the capacitated flow problem.

    Minimizes 0.5*||z - s(xi)||^2 over the per-edge box |xi_e| <= theta_e
    by projected gradient with momentum; the objective is smooth, so the
    (sub)gradient is unique and the box projection is a clip. Returns
    (xi, s, objective).
    """
    z = np.asarray(z, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    ne = g.num_edges
    xi = np.zeros(ne)
    if ne == 0:
        return xi, np.zeros(g.num_nodes), 0.5 * float(np.sum(z**2))

    ei, ej = g.edge_i, g.edge_j

    def s_of(x):
        s = np.zeros(g.num_nodes)
        np.add.at(s, ei, x)
        np.subtract.at(s, ej, x)
        return s

    # Lipschitz constant of the gradient: largest eigenvalue of the
    # unweighted graph Laplacian (incidence-matrix Gram).
    lap = np.zeros((g.num_nodes, g.num_nodes))
    for i, j in zip(ei, ej):
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
    lip = max(float(np.linalg.eigvalsh(lap)[-1]), 1e-12)

    def objective(x):
        r = z - s_of(x)
        return 0.5 * float(np.sum(r * r))

    yv = xi.copy()
    t = 1.0
    obj = objective(xi)
    stall = 0
    for _ in range(max_iters):
        r = z - s_of(yv)
        grad = -(r[ei] - r[ej])
        nxt = np.clip(yv - grad / lip, -theta, theta)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        yv = nxt + ((t - 1.0) / t_next) * (nxt - xi)
        xi = nxt
        t = t_next
        new_obj = objective(xi)
        if abs(new_obj - obj) <= rel_change_tol * (1.0 + abs(new_obj)):
            stall += 1
            if stall >= 50:
                break
        else:
            stall = 0
        obj = new_obj
    return xi, s_of(xi), objective(xi)


@dataclass(frozen=True)
class CutFunction:
    """Scaled graph cut set function: value(S) = lam * w(S, V - S)."""

    graph: Graph
    lam: float

    def value(self, subset) -> float:
        members = np.zeros(self.graph.num_nodes, dtype=bool)
        members[list(subset)] = True
        cut = members[self.graph.edge_i] != members[self.graph.edge_j]
        return self.lam * float(np.sum(self.graph.weight[cut]))


def _adjacency(g: Graph):
    adj = [[] for _ in range(g.num_nodes)]
    for i, j, w in zip(g.edge_i, g.edge_j, g.weight):
        adj[i].append((int(j), float(w)))
        adj[j].append((int(i), float(w)))
    return adj


def greedy_vertex(cut: CutFunction, direction, adj=None) -> np.ndarray:
    """Base-polytope vertex minimizing <direction, v>.

    Visits coordinates in ascending direction order and assigns each the
    marginal gain of the cut function; marginals telescope so the
    coordinates always sum to value(V) = 0.
    """
    g = cut.graph
    if adj is None:
        adj = _adjacency(g)
    order = np.argsort(direction, kind="stable")
    vertex = np.zeros(g.num_nodes)
    placed = np.zeros(g.num_nodes, dtype=bool)
    for v in order:
        gain = 0.0
        for u, w in adj[v]:
            gain += -w if placed[u] else w
        vertex[v] = cut.lam * gain
        placed[v] = True
    return vertex


def mnp_oracle(z, cut: CutFunction, tol: float, max_major: int = 1000) -> np.ndarray:
    """Projection of z onto the base polytope of a scaled cut function.

    Wolfe's min-norm-point method: alternate a greedy linear-minimization
    step with exact affine minimizations over the current corral. The
    objective ||z - s||^2 is 2-strongly convex, so a linearization gap of
    tol certifies ||s - s*||^2 <= tol.
    """
    z = np.asarray(z, dtype=np.float64)
    d = z.size
    if d > MNP_ORACLE_MAX_DIM:
        raise ValueError(
            f"mnp_oracle supports at most {MNP_ORACLE_MAX_DIM} variables, got {d}"
        )
    if d != cut.graph.num_nodes:
        raise ValueError("z length must match the cut function's node count")
    adj = _adjacency(cut.graph)

    x = greedy_vertex(cut, -z, adj)
    corral = [x]
    weights = np.array([1.0])
    for _ in range(max_major):
        grad = 2.0 * (x - z)
        v = greedy_vertex(cut, grad, adj)
        gap = float(grad @ (x - v))
        if gap <= tol:
            return x
        corral.append(v)
        weights = np.append(weights, 0.0)
        for _ in range(2 * len(corral) + 16):
            y, coeffs = _affine_minimize(corral, z)
            if coeffs.min() >= -1e-12:
                x = y
                weights = np.maximum(coeffs, 0.0)
                break
            # step toward y until the first weight hits zero, then prune
            shrink = weights - coeffs
            mask = coeffs < -1e-12
            step = np.min(weights[mask] / shrink[mask])
            weights = (1.0 - step) * weights + step * coeffs
            keep = weights > 1e-12
            corral = [c for c, k in zip(corral, keep) if k]
            weights = weights[keep]
            weights /= weights.sum()
            x = np.vstack(corral).T @ weights
        else:
            raise SolverError("min-norm-point minor cycle failed to settle")
    raise SolverError(
        "min-norm-point did not reach the requested gap",
        best=x,
        residual=gap,
    )


def _affine_minimize(corral, z):
    """Minimize ||z - sum a_i v_i|| subject to sum a_i = 1 (a unrestricted)."""
    V = np.vstack(corral).T
    k = V.shape[1]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = V.T @ V
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.concatenate([V.T @ z, [1.0]])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    coeffs = sol[:k]
    return V @ coeffs, coeffs


def finite_diff_grad(f, x, h: float) -> np.ndarray:
    """Central finite differences (f(x + h e_i) - f(x - h e_i)) / 2h."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def least_squares_ref(X, y) -> np.ndarray:
    """Minimum-norm solution of min_b 0.5 * ||X^T b - y||^2."""
    beta, *_ = np.linalg.lstsq(np.asarray(X).T, np.asarray(y), rcond=None)
    return beta
