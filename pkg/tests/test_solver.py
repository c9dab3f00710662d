import numpy as np
import pytest

from fuseflow.errors import SolverError
from fuseflow.graph import Graph, grid_graph_2d
from fuseflow.oracle import finite_diff_grad, least_squares_ref
from fuseflow.solver import (
    FitResult,
    Problem,
    SolverConfig,
    estimate_lipschitz,
    fit,
    fit_kkt_report,
    logistic_loss_grad,
    objective,
    squared_loss_grad,
)


def signs(rng, n):
    y = np.sign(rng.standard_normal(n))
    y[y == 0] = 1.0
    return y


def small_problem(rng, d=5, n=12, **kw):
    g = grid_graph_2d(1, d)
    X = rng.standard_normal((d, n))
    y = signs(rng, n) if kw.get("loss", "logistic") == "logistic" else rng.standard_normal(n)
    defaults = dict(lambda1=0.1, lambda2=0.1, loss="logistic", constraint="nonnegative")
    defaults.update(kw)
    return Problem(X=X, y=y, graph=g, **defaults)


def test_logistic_at_origin():
    rng = np.random.default_rng(41)
    X = rng.standard_normal((4, 9))
    y = signs(rng, 9)
    loss, _, grad_c = logistic_loss_grad(np.zeros(4), 0.0, X, y)
    assert loss == pytest.approx(9 * np.log(2))
    assert grad_c == pytest.approx(-y.sum() / 2)


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(5):
        X = rng.standard_normal((5, 7))
        y = signs(rng, 7)
        beta = rng.standard_normal(5)
        c = float(rng.standard_normal())
        _, grad, grad_c = logistic_loss_grad(beta, c, X, y)
        fd = finite_diff_grad(lambda b: logistic_loss_grad(b, c, X, y)[0], beta, 1e-5)
        assert np.abs(grad - fd).max() <= 1e-6
        fdc = (
            logistic_loss_grad(beta, c + 1e-5, X, y)[0]
            - logistic_loss_grad(beta, c - 1e-5, X, y)[0]
        ) / 2e-5
        assert abs(grad_c - fdc) <= 1e-6


def test_logistic_saturated_margins_no_overflow():
    X = np.ones((1, 5))
    y = np.ones(5)
    loss, grad, grad_c = logistic_loss_grad(np.array([1e4]), 0.0, X, y)
    assert loss == pytest.approx(0.0, abs=1e-300)
    assert np.isfinite(grad).all() and np.isfinite(grad_c)
    loss, _, _ = logistic_loss_grad(np.array([-1e4]), 0.0, X, y)
    assert np.isfinite(loss)


def test_squared_loss_examples():
    loss, grad = squared_loss_grad(np.zeros(3), np.zeros((3, 4)), np.zeros(4))
    assert loss == 0.0 and np.array_equal(grad, np.zeros(3))
    loss, grad = squared_loss_grad(np.array([1.0]), np.array([[2.0]]), np.array([4.0]))
    assert loss == pytest.approx(2.0)
    assert grad == pytest.approx([-4.0])


def test_squared_gradient_matches_finite_differences():
    rng = np.random.default_rng(43)
    X = rng.standard_normal((5, 8))
    y = rng.standard_normal(8)
    beta = rng.standard_normal(5)
    _, grad = squared_loss_grad(beta, X, y)
    fd = finite_diff_grad(lambda b: squared_loss_grad(b, X, y)[0], beta, 1e-5)
    assert np.abs(grad - fd).max() <= 1e-6


def test_lipschitz_examples():
    assert estimate_lipschitz(np.eye(3), "squared") == pytest.approx(1.01, rel=1e-4)
    # one sample [3], bias row appended: sigma_max([3;1])^2 = 10
    assert estimate_lipschitz(np.array([[3.0]]), "logistic") == pytest.approx(
        10 / 4 * 1.01, rel=1e-4
    )
    assert estimate_lipschitz(np.zeros((3, 3)), "squared") == 1e-12


def test_unpenalized_squared_matches_least_squares():
    rng = np.random.default_rng(44)
    p = small_problem(rng, d=3, n=10, loss="squared", constraint="unconstrained",
                      lambda1=0.0, lambda2=0.0)
    res = fit(p, SolverConfig(max_iters=5000, tol=1e-12))
    assert np.abs(res.beta - least_squares_ref(p.X, p.y)).max() <= 1e-5


def test_huge_lambda1_gives_exact_zero():
    rng = np.random.default_rng(45)
    p0 = small_problem(rng, d=4, n=9, loss="squared")
    lam = 2 * float(np.abs(p0.X @ p0.y).max())
    p = Problem(X=p0.X, y=p0.y, lambda1=lam, lambda2=0.0, graph=p0.graph,
                loss="squared", constraint="nonnegative")
    res = fit(p, SolverConfig(max_iters=50, tol=1e-10))
    assert np.array_equal(res.beta, np.zeros(4))


def test_ista_trace_nonincreasing():
    rng = np.random.default_rng(46)
    p = small_problem(rng, d=6, n=14)
    res = fit(p, SolverConfig(max_iters=200, tol=1e-12, accel="ista"))
    trace = np.array(res.objective_trace)
    assert np.all(np.diff(trace) <= 1e-12 * (1 + np.abs(trace[:-1])))


def test_constraint_respected_at_every_iterate():
    rng = np.random.default_rng(47)
    p = small_problem(rng, d=6, n=14, lambda1=0.05, lambda2=0.05)
    mins = []
    fit(p, SolverConfig(max_iters=100, tol=1e-12),
        callback=lambda b, c: mins.append(b.min(initial=0.0)))
    assert mins and min(mins) >= 0.0


def test_backtracking_matches_spectral():
    rng = np.random.default_rng(48)
    p = small_problem(rng, d=5, n=20)
    res_a = fit(p, SolverConfig(max_iters=3000, tol=1e-12, lipschitz="spectral"))
    res_b = fit(p, SolverConfig(max_iters=3000, tol=1e-12, lipschitz="backtracking"))
    assert res_a.objective_trace[-1] == pytest.approx(res_b.objective_trace[-1], rel=1e-6)
    assert res_b.final_l >= 1.0  # grew from the initial guess


def test_fista_rate_envelope_small():
    rng = np.random.default_rng(49)
    p = small_problem(rng, d=8, n=16, loss="squared", lambda1=0.05, lambda2=0.05)
    ref = fit(p, SolverConfig(max_iters=30000, tol=1e-15))
    fstar = min(ref.objective_trace)
    lip = ref.final_l
    radius = float(ref.beta @ ref.beta)  # beta_0 = 0
    res = fit(p, SolverConfig(max_iters=200, tol=1e-15))
    trace = np.array(res.objective_trace)
    ks = np.arange(1, trace.size)
    assert np.all(trace[1:] - fstar <= 2 * lip * radius / (ks + 1.0) ** 2 + 1e-10)


def test_ista_rate_envelope_small():
    rng = np.random.default_rng(50)
    p = small_problem(rng, d=8, n=16, loss="squared", lambda1=0.05, lambda2=0.05)
    ref = fit(p, SolverConfig(max_iters=30000, tol=1e-15))
    fstar = min(ref.objective_trace)
    lip = ref.final_l
    radius = float(ref.beta @ ref.beta)
    res = fit(p, SolverConfig(max_iters=200, tol=1e-15, accel="ista"))
    trace = np.array(res.objective_trace)
    ks = np.arange(1, trace.size)
    # standard 1/k envelope with 2x slack
    assert np.all(trace[1:] - fstar <= 2 * lip * radius / (2 * ks) + 1e-10)


def test_fit_deterministic():
    rng = np.random.default_rng(51)
    p = small_problem(rng, d=6, n=12)
    cfg = SolverConfig(max_iters=80, tol=1e-10, seed=3)
    a = fit(p, cfg)
    b = fit(p, cfg)
    assert np.array_equal(a.beta, b.beta)
    assert a.bias == b.bias
    assert a.objective_trace == b.objective_trace
    assert a.final_l == b.final_l


def test_full_problem_kkt_at_convergence():
    rng = np.random.default_rng(52)
    for mode in ("nonnegative", "unconstrained"):
        p = small_problem(rng, d=8, n=20, lambda1=0.2, lambda2=0.15, constraint=mode)
        res = fit(p, SolverConfig(max_iters=20000, tol=1e-13))
        rep, bias_grad = fit_kkt_report(p, res.beta, res.bias)
        assert rep.max_stationarity_residual <= 1e-4
        assert rep.feasibility_violation == 0.0
        assert bias_grad <= 1e-4


def test_nan_objective_raises_with_trace():
    g = grid_graph_2d(1, 2)
    X = np.array([[np.inf, 0.0], [0.0, 1.0]])
    p = Problem(X=X, y=np.array([1.0, -1.0]), lambda1=0.0, lambda2=0.0, graph=g,
                loss="squared", constraint="unconstrained")
    with pytest.raises(SolverError) as err:
        fit(p, SolverConfig(max_iters=10, tol=1e-9, lipschitz="backtracking"))
    assert "trace" in err.value.info


def test_problem_validation():
    g = grid_graph_2d(1, 2)
    X = np.zeros((2, 3))
    with pytest.raises(ValueError, match="labels"):
        Problem(X=X, y=np.array([1.0, 2.0, -1.0]), lambda1=0.0, lambda2=0.0,
                graph=g, loss="logistic", constraint="nonnegative")
    with pytest.raises(ValueError):
        Problem(X=X, y=np.zeros(2), lambda1=0.0, lambda2=0.0, graph=g,
                loss="squared", constraint="nonnegative")
    with pytest.raises(ValueError):
        SolverConfig(tol=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(accel="nesterov")


def test_objective_includes_all_terms():
    g = Graph.from_edges(2, [(0, 1, 2.0)])
    X = np.eye(2)
    p = Problem(X=X, y=np.array([1.0, 0.0]), lambda1=0.5, lambda2=0.25, graph=g,
                loss="squared", constraint="unconstrained")
    beta = np.array([1.0, 0.0])
    # loss 0, l1: 0.5*1, fusion: 0.25*2*|1-0| = 0.5
    assert objective(p, beta, 0.0) == pytest.approx(1.0)
