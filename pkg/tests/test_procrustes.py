import numpy as np
import pytest

from procwass.errors import DimensionMismatch
from procwass.linalg import random_orthogonal, rotation_2d
from procwass.procrustes import AlignConfig, center, initial_starts, procrustes_step, pw_empirical
from procwass.transport import DiscreteMeasure, cost_matrix, plan_cost, solve_exact

from oracles import o2_grid, pw_empirical_2d_bruteforce

NO_SCREEN = AlignConfig(screen_size=None)


def M(points, weights=None):
    return DiscreteMeasure(np.asarray(points, dtype=float), weights)


def cloud(seed, n=30, scales=(1.0, 3.0)):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, len(scales))) * np.asarray(scales)


def test_center_examples():
    c, m = center(M([[-1.0], [1.0]]))
    np.testing.assert_array_equal(c.points, [[-1.0], [1.0]])
    np.testing.assert_array_equal(m, [0.0])
    c, m = center(M([[2.0, 3.0]]))
    np.testing.assert_array_equal(c.points, [[0.0, 0.0]])
    np.testing.assert_array_equal(m, [2.0, 3.0])
    c, m = center(M([[0.0], [4.0]], [0.75, 0.25]))
    np.testing.assert_allclose(m, [1.0])
    np.testing.assert_allclose(c.points, [[-1.0], [3.0]])


def test_step_identity_plan():
    X = M(cloud(0, 10))
    np.testing.assert_allclose(procrustes_step(X, X, np.eye(10) / 10).matrix, np.eye(2), atol=1e-12)


def test_step_recovers_rotation():
    X = cloud(1, 12)
    R = rotation_2d(np.pi / 6)
    theta = procrustes_step(M(X), M(X @ R.T), np.eye(12) / 12).matrix
    np.testing.assert_allclose(theta, R, atol=1e-8)
    # same answer as maximizing the matched objective on an angle grid
    grid = o2_grid(36_000)
    obj = ((X[None] @ np.swapaxes(grid, 1, 2) - (X @ R.T)[None]) ** 2).sum((1, 2))
    np.testing.assert_allclose(theta, grid[np.argmin(obj)], atol=1e-3)


def test_step_axis_swap():
    X = M([[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [-2.0, 0.0]])
    Y = M([[0.0, 1.0], [0.0, -1.0], [0.0, 2.0], [0.0, -2.0]])
    P = np.eye(4) / 4
    theta = procrustes_step(X, Y, P).matrix
    np.testing.assert_allclose(theta @ [1.0, 0.0], [0.0, 1.0], atol=1e-12)
    # both the rotation and the reflection carry e1 to e2; neither beats the other
    C_rot = cost_matrix(X.transform(rotation_2d(np.pi / 2)), Y)
    C_ref = cost_matrix(X.transform(rotation_2d(np.pi / 2, reflect=True)), Y)
    C_got = cost_matrix(X.transform(theta), Y)
    assert plan_cost(P, C_got) == pytest.approx(min(plan_cost(P, C_rot), plan_cost(P, C_ref)), abs=1e-12)
    rot = procrustes_step(X, Y, P, restrict_special=True)
    assert rot.special


def test_step_shape_checks():
    with pytest.raises(DimensionMismatch):
        procrustes_step(M(np.zeros((3, 2))), M(np.zeros((3, 2))), np.eye(2))


def test_identical_clouds():
    X = M(cloud(2))
    res = pw_empirical(X, X, NO_SCREEN)
    assert res.distance == 0.0
    np.testing.assert_allclose(res.theta_star.matrix, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_rotated_copy(d):
    rng = np.random.default_rng(d)
    X = rng.normal(size=(25, d)) * np.arange(1, d + 1)
    for seed in range(4):
        O = random_orthogonal(d, seed).matrix
        res = pw_empirical(M(X), M(X @ O.T + 5.0), NO_SCREEN)
        assert res.distance < 1e-6
        np.testing.assert_allclose(res.theta_star.matrix, O, atol=1e-6)
        np.testing.assert_allclose(res.translation, res.theta_star.matrix @ X.mean(0) - (X @ O.T + 5).mean(0))


@pytest.mark.parametrize("seed", range(4))
def test_against_angle_grid_bruteforce(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(5, 2)) * [1, 2], rng.normal(size=(5, 2)) * [2, 1]
    oracle = pw_empirical_2d_bruteforce(X, Y, n_angles=3600)
    got = pw_empirical(M(X), M(Y), AlignConfig(num_restarts=8, screen_size=None)).distance
    # the grid only over-estimates, by at most a grid-spacing term
    assert got <= oracle + 1e-9
    assert got >= oracle - 1e-3


def test_properties_small():
    rng = np.random.default_rng(7)
    for _ in range(5):
        X, Y = rng.normal(size=(20, 2)) * [1, 2], rng.normal(size=(15, 2)) * [3, 1]
        res = pw_empirical(M(X), M(Y), NO_SCREEN)
        back = pw_empirical(M(Y), M(X), NO_SCREEN)
        assert res.distance == pytest.approx(back.distance, rel=1e-6, abs=1e-9)
        # never worse than plain W2 of the centered clouds
        Xc, Yc = M(X - X.mean(0)), M(Y - Y.mean(0))
        C = cost_matrix(Xc, Yc)
        assert res.distance**2 <= plan_cost(solve_exact(Xc, Yc, C), C) + 1e-12
        # invariant under an orthogonal map of one input, with the starts
        # carried along by the same map
        O = random_orthogonal(2, 3).matrix
        starts = [(n, th @ O.T) for n, th in initial_starts(Xc, Yc, NO_SCREEN)]
        moved = pw_empirical(M(X @ O.T), M(Y), NO_SCREEN, starts=starts)
        assert moved.distance == pytest.approx(res.distance, rel=1e-6, abs=1e-9)


def test_trace_non_increasing_and_converged():
    X, Y = M(cloud(3, 40)), M(cloud(4, 40, (2.0, 0.5)))
    res = pw_empirical(X, Y, NO_SCREEN)
    assert res.converged
    assert np.all(np.diff(res.trace) <= 0)
    assert res.distance**2 == pytest.approx(res.trace[-1])
    assert res.start in res.start_objectives


def test_special_orthogonal_restriction():
    X = cloud(5, 20)
    F = np.diag([1.0, -1.0])
    res = pw_empirical(M(X), M(X @ F.T), AlignConfig(restrict_special=True, screen_size=None))
    assert res.theta_star.special
    free = pw_empirical(M(X), M(X @ F.T), NO_SCREEN)
    assert free.distance < 1e-6
    assert res.distance >= free.distance


def test_screening_path():
    X, Y = M(cloud(6, 300)), M(cloud(7, 300, (3.0, 1.0)))
    cfg = AlignConfig(screen_size=100)
    a = pw_empirical(X, Y, cfg)
    b = pw_empirical(X, Y, cfg)
    assert a.distance == b.distance
    Xc, Yc = center(X)[0], center(Y)[0]
    C = cost_matrix(Xc, Yc)
    assert a.distance**2 <= plan_cost(solve_exact(Xc, Yc, C), C) + 1e-12


def test_sinkhorn_backend_runs():
    X, Y = M(cloud(8, 20)), M(cloud(9, 20))
    res = pw_empirical(X, Y, AlignConfig(ot_backend="sinkhorn", screen_size=None))
    assert res.plan.solver == "sinkhorn"
    assert np.all(np.diff(res.trace) <= 0)


def test_config_validation():
    with pytest.raises(ValueError):
        AlignConfig(num_restarts=0)
    with pytest.raises(ValueError):
        AlignConfig(ot_backend="greedy")
    with pytest.raises(DimensionMismatch):
        pw_empirical(M(np.zeros((3, 2))), M(np.zeros((3, 3))))


def test_thread_cap_does_not_change_result(monkeypatch):
    X, Y = M(cloud(10, 25)), M(cloud(11, 25, (2.0, 2.5)))
    monkeypatch.setenv("PROCWASS_THREADS", "1")
    serial = pw_empirical(X, Y, NO_SCREEN)
    monkeypatch.setenv("PROCWASS_THREADS", "4")
    parallel = pw_empirical(X, Y, NO_SCREEN)
    assert serial.distance == parallel.distance
    np.testing.assert_array_equal(serial.theta_star.matrix, parallel.theta_star.matrix)


def test_step_beats_random_group_elements():
    rng = np.random.default_rng(12)
    X, Y = M(rng.normal(size=(8, 3))), M(rng.normal(size=(6, 3)))
    P = solve_exact(X, Y).coupling
    for restrict in (False, True):
        theta = procrustes_step(X, Y, P, restrict).matrix
        best = plan_cost(P, cost_matrix(X.transform(theta), Y))
        for k in range(64):
            Q = random_orthogonal(3, k, restrict).matrix
            assert best <= plan_cost(P, cost_matrix(X.transform(Q), Y)) + 1e-12
