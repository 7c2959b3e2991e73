"""Independent reference computations used by the tests.

Nothing here imports procwass: each oracle is brute force or a textbook
identity evaluated with plain numpy, so agreement is a genuine cross-check.
"""

import itertools
from statistics import NormalDist

import numpy as np


def sqrtm_eigh(S):
    w, U = np.linalg.eigh(S)
    return (U * np.sqrt(np.clip(w, 0, None))) @ U.T


def o2_grid(n_angles=100_000):
    """All rotations and reflections of the plane on a uniform angle grid,
    shape ``(2 * n_angles, 2, 2)``."""
    phi = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    c, s = np.cos(phi), np.sin(phi)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    refl = rot @ np.diag([1.0, -1.0])
    return np.concatenate([rot, refl])


def fidelity_2d(thetas, S0, S1):
    """tr sqrt(S1^1/2 th S0 th^T S1^1/2) for a stack of 2x2 ``thetas``.

    For a 2x2 PSD matrix M, tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)).
    """
    R1 = sqrtm_eigh(S1)
    M = R1 @ thetas @ S0 @ np.swapaxes(thetas, -1, -2) @ R1
    tr = np.trace(M, axis1=-2, axis2=-1)
    det = np.clip(np.linalg.det(M), 0, None)
    return np.sqrt(np.clip(tr + 2 * np.sqrt(det), 0, None))


def pw_gaussian_2d_grid(S0, S1, n_angles=100_000):
    """min over an O(2) grid of sqrt(tr S0 + tr S1 - 2 F(theta))."""
    F = fidelity_2d(o2_grid(n_angles), S0, S1)
    d2 = np.trace(S0) + np.trace(S1) - 2 * F.max()
    return float(np.sqrt(max(d2, 0.0)))


def w2_1d_gaussian_quantiles(m0, s0, m1, s1, n=200_000):
    """W2 between 1-D normals via the quantile coupling, midpoint rule.

    The standard deviations are ``s0`` and ``s1`` (not variances).
    """
    u = (np.arange(n) + 0.5) / n
    z = np.array([NormalDist().inv_cdf(t) for t in u])
    q0 = m0 + s0 * z
    q1 = m1 + s1 * z
    return float(np.sqrt(np.mean((q0 - q1) ** 2)))


def ot_permutation_bruteforce(C):
    """Min over all permutations of (1/n) sum_i C[i, sigma(i)] (uniform n x n)."""
    n = C.shape[0]
    perms = np.array(list(itertools.permutations(range(n))))
    costs = C[np.arange(n), perms].sum(axis=1) / n
    k = int(np.argmin(costs))
    return float(costs[k]), tuple(perms[k])


def sq_dists(X, Y):
    return ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)


def pw_empirical_2d_bruteforce(X, Y, n_angles=3600):
    """Procrustes-Wasserstein over O(2) for equal-size uniform clouds, by an
    angle grid with exact assignment at each angle (small n only)."""
    Xc = X - X.mean(0)
    Yc = Y - Y.mean(0)
    best = np.inf
    for th in o2_grid(n_angles):
        c, _ = ot_permutation_bruteforce(sq_dists(Xc @ th.T, Yc))
        best = min(best, c)
    return float(np.sqrt(best))


def random_spd(rng, d, floor=0.05):
    A = rng.standard_normal((d, d))
    return A @ A.T + floor * np.eye(d)


def haar_qr(rng, d):
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))
