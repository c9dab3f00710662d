import numpy as np
import pytest

from fuseflow.fusedprox import (
    ProxInstance,
    check_kkt,
    fused_prox,
    soft_threshold,
    support,
)
from fuseflow.graph import Graph, grid_graph_2d

PATH2 = Graph.from_edges(2, [(0, 1, 1.0)])


def make_inst(z, theta_node=0.0, theta_edge=None, mode="nonnegative", graph=PATH2):
    if theta_edge is None:
        theta_edge = np.zeros(graph.num_edges)
    return ProxInstance(
        z=np.asarray(z, float),
        graph=graph,
        theta_node=theta_node,
        theta_edge=np.asarray(theta_edge, float),
        constraint=mode,
    )


def test_pure_projection():
    out = fused_prox(make_inst([3.0, -1.0]), 1e-9)
    assert np.array_equal(out, [3.0, 0.0])


def test_threshold_then_clamp():
    out = fused_prox(make_inst([3.0, -1.0], theta_node=1.0), 1e-9)
    assert np.array_equal(out, [2.0, 0.0])


def test_unconstrained_is_plain_soft_threshold():
    out = fused_prox(make_inst([3.0, -1.0], theta_node=1.0, mode="unconstrained"), 1e-9)
    assert np.array_equal(out, [2.0, 0.0])
    out = fused_prox(make_inst([3.0, -2.5], theta_node=1.0, mode="unconstrained"), 1e-9)
    assert out == pytest.approx([2.0, -1.5])


def test_nonpositive_by_symmetry():
    inst = make_inst([-3.0, 1.0], theta_node=1.0, mode="nonpositive")
    out = fused_prox(inst, 1e-9)
    assert np.array_equal(out, [-2.0, 0.0])
    assert not np.signbit(out[1])  # clean zero, not -0.0


def test_exact_sparsity_and_support():
    rng = np.random.default_rng(21)
    g = grid_graph_2d(3, 4)
    for _ in range(20):
        inst = ProxInstance(
            z=rng.standard_normal(12),
            graph=g,
            theta_node=float(rng.uniform(0.3, 1.5)),
            theta_edge=rng.uniform(0, 1, g.num_edges),
            constraint="nonnegative",
        )
        out = fused_prox(inst, 1e-9)
        assert np.min(out) >= 0.0
        killed = out == 0.0
        # exact zeros, no epsilon residue
        assert np.all(np.abs(out[killed]) == 0.0)
        assert support(out) == set(np.nonzero(out)[0].tolist())


def test_support_monotone_in_node_threshold_separable():
    rng = np.random.default_rng(22)
    g = grid_graph_2d(3, 3)
    zero_edges = np.zeros(g.num_edges)
    for _ in range(10):
        z = rng.standard_normal(9) * 2
        lo = float(rng.uniform(0.1, 0.8))
        hi = lo + float(rng.uniform(0.1, 1.0))
        s_lo = support(fused_prox(make_inst(z, lo, zero_edges, "nonnegative", g), 1e-9))
        s_hi = support(fused_prox(make_inst(z, hi, zero_edges, "nonnegative", g), 1e-9))
        assert s_hi <= s_lo


def test_check_kkt_on_prox_outputs():
    rng = np.random.default_rng(23)
    g = grid_graph_2d(2, 3)
    tol = 1e-8
    for mode in ("nonnegative", "nonpositive", "unconstrained"):
        for _ in range(10):
            inst = ProxInstance(
                z=rng.standard_normal(6) * 2,
                graph=g,
                theta_node=float(rng.uniform(0, 1.5)),
                theta_edge=rng.uniform(0, 1.5, g.num_edges),
                constraint=mode,
            )
            out = fused_prox(inst, tol)
            rep = check_kkt(out, inst, 10 * tol)
            assert rep.max_stationarity_residual <= 10 * tol
            assert rep.complementarity_violation <= 10 * tol
            assert rep.feasibility_violation == 0.0


def test_check_kkt_flags_bad_candidate():
    inst = make_inst([3.0, -1.0], theta_node=1.0)
    rep = check_kkt(np.array([3.0, -1.0]), inst, 1e-9)
    assert rep.max_stationarity_residual >= 1.0
    assert rep.feasibility_violation == pytest.approx(1.0)


def test_check_kkt_zero_point():
    inst = make_inst([0.0, 0.0], theta_node=0.7)
    rep = check_kkt(np.zeros(2), inst, 1e-9)
    assert rep.max_stationarity_residual == 0.0
    assert rep.complementarity_violation == 0.0
    assert rep.feasibility_violation == 0.0


def test_soft_threshold():
    v = np.array([2.0, -2.0, 0.3, -0.3])
    out = soft_threshold(v, 0.5)
    assert out == pytest.approx([1.5, -1.5, 0.0, 0.0])
    assert not np.signbit(out[3])


def test_invalid_arguments():
    with pytest.raises(ValueError):
        make_inst([1.0, 2.0], theta_node=-0.1)
    with pytest.raises(ValueError):
        make_inst([1.0, 2.0], mode="positive")
    with pytest.raises(ValueError):
        ProxInstance(
            z=np.zeros(3),
            graph=PATH2,
            theta_node=0.0,
            theta_edge=np.zeros(1),
            constraint="nonnegative",
        )
