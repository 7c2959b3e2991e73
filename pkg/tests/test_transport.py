import math

import numpy as np
import pytest

from procwass.errors import DimensionMismatch, InfeasibleWeights, NotConverged
from procwass.transport import (
    DiscreteMeasure,
    TransportPlan,
    cost_matrix,
    duality_report,
    plan_cost,
    round_to_marginals,
    solve_exact,
    solve_sinkhorn,
)

from oracles import ot_permutation_bruteforce, sq_dists


def M(points, weights=None):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return DiscreteMeasure(pts, weights)


def fifty_point_instance():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 2)) * [1.0, 2.0]
    Y = rng.normal(size=(50, 2)) * [3.0, 4.0]
    return M(X), M(Y)


def test_measure_normalizes_weights():
    m = M([0.0, 4.0], [3.0, 1.0])
    np.testing.assert_allclose(m.weights, [0.75, 0.25])
    assert m.mean() == pytest.approx([1.0])


def test_measure_rejects_bad_weights():
    with pytest.raises(InfeasibleWeights):
        M([0.0, 1.0], [-1.0, 2.0])
    with pytest.raises(InfeasibleWeights):
        M([0.0, 1.0], [0.0, 0.0])


def test_cost_matrix_examples():
    x = np.random.default_rng(0).normal(size=(4, 3))
    np.testing.assert_array_equal(np.diag(cost_matrix(M(x), M(x))), 0.0)
    np.testing.assert_array_equal(cost_matrix(M([0.0]), M([3.0])), [[9.0]])
    np.testing.assert_array_equal(cost_matrix(M([[0.0, 0.0]]), M([[3.0, 4.0]])), [[25.0]])


def test_cost_matrix_exactly_symmetric_and_matches_oracle():
    rng = np.random.default_rng(1)
    X, Y = rng.normal(size=(7, 3)), rng.normal(size=(5, 3))
    C = cost_matrix(M(X), M(Y))
    np.testing.assert_array_equal(C.T, cost_matrix(M(Y), M(X)))
    np.testing.assert_allclose(C, sq_dists(X, Y), atol=1e-13)


def test_cost_matrix_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cost_matrix(M(np.zeros((2, 2))), M(np.zeros((2, 3))))


def test_exact_single_point():
    plan = solve_exact(M([[1.0, 2.0]]), M([[4.0, 6.0]]))
    np.testing.assert_array_equal(plan.coupling, [[1.0]])
    assert plan_cost(plan, [[25.0]]) == 25.0


def test_exact_1d_identity_matching():
    plan = solve_exact(M([0.0, 1.0]), M([0.0, 1.0]))
    np.testing.assert_allclose(plan.coupling, np.eye(2) / 2)
    assert plan_cost(plan, cost_matrix(M([0.0, 1.0]), M([0.0, 1.0]))) == 0.0


def test_exact_1d_monotone_against_enumeration():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=3), rng.normal(size=3)
    C = (x[:, None] - y[None, :]) ** 2
    best, perm = ot_permutation_bruteforce(C)
    # the enumerated optimum is the sorted matching
    assert list(perm) == list(np.argsort(y)[np.argsort(np.argsort(x))])
    plan = solve_exact(M(x), M(y))
    expected = np.zeros((3, 3))
    expected[np.arange(3), perm] = 1 / 3
    np.testing.assert_allclose(plan.coupling, expected, atol=1e-15)
    assert plan_cost(plan, C) == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_exact_matches_permutation_bruteforce(n, d):
    rng = np.random.default_rng(100 * n + d)
    for _ in range(5):
        X, Y = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        C = cost_matrix(M(X), M(Y))
        plan = solve_exact(M(X), M(Y), C)
        best, _ = ot_permutation_bruteforce(C)
        assert plan_cost(plan, C) == pytest.approx(best, abs=1e-9)
        rep = duality_report(plan, C, np.full(n, 1 / n), np.full(n, 1 / n))
        assert rep["gap"] < 1e-7 * (1 + rep["primal"])
        assert rep["violation"] < 1e-9


def test_exact_weighted_marginals():
    rng = np.random.default_rng(4)
    mu = M(rng.normal(size=(6, 2)), rng.uniform(0.1, 1, 6))
    nu = M(rng.normal(size=(4, 2)), rng.uniform(0.1, 1, 4))
    plan = solve_exact(mu, nu)
    np.testing.assert_allclose(plan.coupling.sum(1), mu.weights, atol=1e-12)
    np.testing.assert_allclose(plan.coupling.sum(0), nu.weights, atol=1e-12)
    assert plan.marginal_error < 1e-12


def test_duality_report_requires_duals():
    with pytest.raises(ValueError):
        duality_report(TransportPlan(np.eye(2) / 2), np.zeros((2, 2)), np.full(2, 0.5), np.full(2, 0.5))


def test_round_to_marginals():
    rng = np.random.default_rng(3)
    a, b = np.full(4, 0.25), np.array([0.1, 0.2, 0.3, 0.4])
    P = round_to_marginals(rng.uniform(size=(4, 4)), a, b)
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(1), a, atol=1e-15)
    np.testing.assert_allclose(P.sum(0), b, atol=1e-15)


def test_sinkhorn_single_point():
    for eps in (1e-3, 1.0, 100.0):
        plan = solve_sinkhorn(M([[0.0]]), M([[2.0]]), epsilon=eps)
        np.testing.assert_allclose(plan.coupling, [[1.0]])


def test_sinkhorn_identical_measures_bound():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(20, 2))
    C = cost_matrix(M(X), M(X))
    exact = plan_cost(solve_exact(M(X), M(X), C), C)
    eps = 0.1
    plan = solve_sinkhorn(M(X), M(X), C, epsilon=eps)
    assert plan_cost(plan, C) <= exact + 2 * eps * math.log(20)


def test_sinkhorn_cost_decreases_with_epsilon():
    mu, nu = fifty_point_instance()
    C = cost_matrix(mu, nu)
    exact = plan_cost(solve_exact(mu, nu, C), C)
    costs = [
        plan_cost(solve_sinkhorn(mu, nu, C, epsilon=f * C.mean(), max_iter=50_000), C) for f in (1.0, 0.1)
    ]
    assert costs[0] > costs[1] > exact


@pytest.mark.parametrize("factor", [1.0, 0.1])
def test_sinkhorn_rounded_cost_trace_non_increasing(factor):
    mu, nu = fifty_point_instance()
    C = cost_matrix(mu, nu)
    plan = solve_sinkhorn(mu, nu, C, epsilon=factor * C.mean(), track_cost=True, max_iter=5000)
    trace = np.asarray(plan.cost_trace)
    assert len(trace) == plan.iterations
    assert np.all(np.diff(trace) <= 1e-12 * trace[0])


def test_sinkhorn_marginals_exact_after_rounding():
    mu, nu = fifty_point_instance()
    plan = solve_sinkhorn(mu, nu, max_iter=200)
    assert plan.marginal_error < 1e-12
    assert plan.solver_tag.startswith("sinkhorn(")


def test_sinkhorn_strict_raises():
    mu, nu = fifty_point_instance()
    with pytest.raises(NotConverged):
        solve_sinkhorn(mu, nu, epsilon=1e-3, max_iter=3, strict=True)
    plan = solve_sinkhorn(mu, nu, epsilon=1e-3, max_iter=3)
    assert not plan.converged


def test_plan_cost_examples():
    assert plan_cost(TransportPlan(np.eye(3) / 3), np.zeros((3, 3))) == 0.0
    assert plan_cost(TransportPlan(np.array([[1.0]])), [[9.0]]) == 9.0
    with pytest.raises(DimensionMismatch):
        plan_cost(TransportPlan(np.eye(2) / 2), np.zeros((3, 3)))
