"""Quick invariant checks run by ``procwass selftest``."""

from __future__ import annotations

import numpy as np

from .gaussian import GaussianDistribution, bures_w2, pw_gaussian
from .linalg import polar_orthogonal_factor, random_orthogonal, rotation_2d, sym_eigen
from .procrustes import AlignConfig, pw_empirical
from .transport import DiscreteMeasure, solve_exact, solve_sinkhorn


def _closed_form_example() -> bool:
    g0 = GaussianDistribution.centered(np.diag([1.0, 4.0]))
    g1 = GaussianDistribution.centered(np.diag([9.0, 16.0]))
    return abs(pw_gaussian(g0, g1).distance - 2 * np.sqrt(2)) < 1e-10


def _bures_1d() -> bool:
    g0 = GaussianDistribution(np.array([0.0]), np.array([[1.0]]))
    g1 = GaussianDistribution(np.array([2.0]), np.array([[9.0]]))
    return abs(bures_w2(g0, g1) - np.sqrt(8.0)) < 1e-12


def _pw_below_bures(rng) -> bool:
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3))
    g0 = GaussianDistribution.centered(A @ A.T + 0.1 * np.eye(3))
    g1 = GaussianDistribution.centered(B @ B.T + 0.1 * np.eye(3))
    return pw_gaussian(g0, g1).distance <= bures_w2(g0, g1) + 1e-10


def _eigen_reconstructs(rng) -> bool:
    A = rng.standard_normal((5, 5))
    S = A + A.T
    dec = sym_eigen(S)
    return np.allclose(dec.reconstruct(), S, atol=1e-10)


def _polar_recovers_rotation() -> bool:
    R = rotation_2d(np.pi / 6)
    return np.allclose(polar_orthogonal_factor(R.T).matrix, R, atol=1e-12)


def _exact_ot_permutation(rng) -> bool:
    x = rng.standard_normal((5, 2))
    perm = rng.permutation(5)
    plan = solve_exact(DiscreteMeasure(x), DiscreteMeasure(x[perm]))
    return np.allclose(plan.coupling * 5, _perm_matrix(perm))


def _perm_matrix(perm) -> np.ndarray:
    # x[perm][j] = x[perm[j]], so mass goes from i = perm[j] to j
    M = np.zeros((len(perm), len(perm)))
    M[perm, np.arange(len(perm))] = 1.0
    return M


def _sinkhorn_marginals(rng) -> bool:
    mu = DiscreteMeasure(rng.standard_normal((8, 2)))
    nu = DiscreteMeasure(rng.standard_normal((6, 2)))
    P = solve_sinkhorn(mu, nu).coupling
    return np.allclose(P.sum(1), mu.weights, atol=1e-12) and np.allclose(P.sum(0), nu.weights, atol=1e-12)


def _rotated_copy(seed) -> bool:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((40, 2)) * [1.0, 3.0]
    Q = random_orthogonal(2, seed).matrix
    res = pw_empirical(DiscreteMeasure(X), DiscreteMeasure(X @ Q.T), AlignConfig(seed=seed))
    return res.distance < 1e-6


def run_selftest(seed: int = 0) -> dict:
    """Run every check; returns ``{name: passed}``."""
    rng = np.random.default_rng(seed)
    checks = {
        "gaussian_closed_form": _closed_form_example,
        "bures_1d": _bures_1d,
        "pw_below_bures": lambda: _pw_below_bures(rng),
        "eigen_reconstructs": lambda: _eigen_reconstructs(rng),
        "polar_recovers_rotation": _polar_recovers_rotation,
        "exact_ot_permutation": lambda: _exact_ot_permutation(rng),
        "sinkhorn_marginals": lambda: _sinkhorn_marginals(rng),
        "rotated_copy_distance_zero": lambda: _rotated_copy(seed),
    }
    out = {}
    for name, fn in checks.items():
        try:
            out[name] = bool(fn())
        except Exception:  # a crash is a failed check, not a crashed selftest
            out[name] = False
    return out
