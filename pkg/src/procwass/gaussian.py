"""Closed-form distances and maps between Gaussian distributions.

``bures_w2`` is the usual 2-Wasserstein distance between Gaussians.
``pw_gaussian`` is the distance modulo orthogonal transformations and
translations: it only depends on the sorted covariance spectra, through the
square roots of the eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite, NotPSD, SingularCovariance
from .linalg import (
    OrthogonalMatrix,
    _clamped_spectrum,
    as_symmetric,
    psd_inv_sqrt,
    psd_sqrt,
)

__all__ = [
    "GaussianDistribution",
    "GaussianClass",
    "LinearMap",
    "GaussianPWResult",
    "bures_w2",
    "gaussian_F",
    "pw_gaussian",
    "canonical_class",
    "class_distance",
    "monge_map",
]


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianDistribution:
    """``N(mean, cov)`` on R^d. The covariance is symmetrized and checked PSD."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = as_symmetric(self.cov)
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if mean.ndim != 1 or mean.shape[0] != cov.shape[0]:
            raise DimensionMismatch(
                f"mean has shape {mean.shape} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        if not np.all(np.isfinite(mean)):
            raise NonFinite("mean has NaN or Inf entries")
        _clamped_spectrum(cov)
        object.__setattr__(self, "mean", _ro(mean))
        object.__setattr__(self, "cov", _ro(cov))

    @classmethod
    def centered(cls, cov) -> "GaussianDistribution":
        cov = as_symmetric(cov)
        return cls(np.zeros(cov.shape[0]), cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def center(self) -> "GaussianDistribution":
        return GaussianDistribution(np.zeros(self.dim), self.cov)

    def pushforward(self, O) -> "GaussianDistribution":
        """Law of ``O @ X`` for ``X ~ self``."""
        O = np.asarray(O, dtype=float)
        return GaussianDistribution(O @ self.mean, O @ self.cov @ O.T)


@dataclass(frozen=True)
class GaussianClass:
    """Orbit of a centered Gaussian under O(d), stored as its sorted sqrt-spectrum."""

    sqrt_eigenvalues: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.sqrt_eigenvalues, dtype=float))
        if v.ndim != 1:
            raise DimensionMismatch("sqrt_eigenvalues must be a vector")
        if not np.all(np.isfinite(v)):
            raise NonFinite("sqrt_eigenvalues has NaN or Inf entries")
        if np.any(v < 0):
            raise ValueError("sqrt_eigenvalues must be non-negative")
        if np.any(np.diff(v) < 0):
            raise ValueError("sqrt_eigenvalues must be sorted ascending")
        object.__setattr__(self, "sqrt_eigenvalues", _ro(v))

    @property
    def dim(self) -> int:
        return self.sqrt_eigenvalues.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.sqrt_eigenvalues**2

    def representative(self) -> GaussianDistribution:
        """The diagonal centered Gaussian in this class."""
        return GaussianDistribution(np.zeros(self.dim), np.diag(self.eigenvalues))


@dataclass(frozen=True)
class LinearMap:
    """Affine map ``x -> matrix @ x + offset``."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = _ro(self.matrix)
        b = _ro(np.atleast_1d(self.offset))
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise DimensionMismatch("matrix and offset dimensions disagree")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T + self.offset


@dataclass(frozen=True)
class GaussianPWResult:
    distance: float
    theta_star: OrthogonalMatrix
    mean_gap: float


def _check_dims(*mats):
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def bures_w2(g0: GaussianDistribution, g1: GaussianDistribution) -> float:
    """2-Wasserstein distance between two Gaussians.

    .. math::
        W_2^2 = \\|m_0 - m_1\\|^2 + \\mathrm{tr}\\left(\\Sigma_0 + \\Sigma_1
        - 2 (\\Sigma_1^{1/2} \\Sigma_0 \\Sigma_1^{1/2})^{1/2}\\right)

    The trace term is clamped at zero before taking the root.
    """
    _check_dims(g0.cov, g1.cov)
    s1 = psd_sqrt(g1.cov)
    cross = psd_sqrt(s1 @ g0.cov @ s1)
    bures = np.trace(g0.cov) + np.trace(g1.cov) - 2.0 * np.trace(cross)
    gap = g0.mean - g1.mean
    return math.sqrt(float(gap @ gap) + max(float(bures), 0.0))


def gaussian_F(theta, sigma0, sigma1) -> float:
    """``trace((S1^{1/2} theta S0 theta^T S1^{1/2})^{1/2})``.

    The fidelity term whose supremum over orthogonal ``theta`` fixes the
    Gaussian Procrustes-Wasserstein distance.
    """
    sigma0 = as_symmetric(sigma0)
    sigma1 = as_symmetric(sigma1)
    theta = np.asarray(theta, dtype=float)
    _check_dims(sigma0, sigma1, theta)
    s1 = psd_sqrt(sigma1)
    rotated = theta @ sigma0 @ theta.T
    inner = s1 @ rotated @ s1
    lam = _clamped_spectrum(inner).eigenvalues
    return float(np.sum(np.sqrt(lam)))


def _sqrt_spectrum(cov) -> np.ndarray:
    return np.sqrt(_clamped_spectrum(cov).eigenvalues)


def canonical_class(g: GaussianDistribution) -> GaussianClass:
    return GaussianClass(_sqrt_spectrum(g.cov))


def class_distance(c0: GaussianClass, c1: GaussianClass) -> float:
    if c0.dim != c1.dim:
        raise DimensionMismatch(f"class dimensions differ: {c0.dim} vs {c1.dim}")
    return float(np.linalg.norm(c0.sqrt_eigenvalues - c1.sqrt_eigenvalues))


def _sign_fix(P: np.ndarray) -> np.ndarray:
    P = P.copy()
    P[:, 0] = -P[:, 0]
    return P


def pw_gaussian(
    g0: GaussianDistribution, g1: GaussianDistribution, restrict_special: bool = False
) -> GaussianPWResult:
    """Procrustes-Wasserstein distance between two Gaussians.

    The distance is ``||sqrt(a0) - sqrt(a1)||`` for the ascending eigenvalue
    vectors ``a0``, ``a1``; means are ignored. ``theta_star`` aligns the
    eigenbases of the two covariances. Two products of the eigenbasis
    matrices are scored with :func:`gaussian_F` and the larger one is kept.

    Sign flips of eigenvectors do not change ``gaussian_F``, so the SO(d)
    restriction never changes the distance, only the returned ``theta_star``.
    """
    _check_dims(g0.cov, g1.cov)
    d0 = _clamped_spectrum(g0.cov)
    d1 = _clamped_spectrum(g1.cov)
    P0, P1 = d0.eigenvectors, d1.eigenvectors
    if restrict_special and np.linalg.det(P0) * np.linalg.det(P1) < 0:
        P0 = _sign_fix(P0)
    candidates = [P1 @ P0.T, P0.T @ P1]
    scores = [gaussian_F(th, g0.cov, g1.cov) for th in candidates]
    best = candidates[int(np.argmax(scores))]
    dist = float(np.linalg.norm(np.sqrt(d0.eigenvalues) - np.sqrt(d1.eigenvalues)))
    return GaussianPWResult(
        distance=dist,
        theta_star=OrthogonalMatrix(best),
        mean_gap=float(np.linalg.norm(g0.mean - g1.mean)),
    )


def monge_map(g0: GaussianDistribution, g1: GaussianDistribution) -> LinearMap:
    """Optimal transport map from ``g0`` to ``g1``, ``x -> m1 + A (x - m0)``.

    Requires a strictly positive definite source covariance. For the map that
    realizes the Procrustes-Wasserstein distance, push ``g0`` forward by
    ``pw_gaussian(g0, g1).theta_star`` first.

    Raises
    ------
    SingularCovariance
        If the smallest eigenvalue of the source covariance is at most
        ``1e-12`` times the largest.
    """
    _check_dims(g0.cov, g1.cov)
    try:
        inv_half = psd_inv_sqrt(g0.cov)
    except NotPSD as exc:
        # g0.cov is already known to be PSD, so this can only be singularity
        raise SingularCovariance("source covariance is singular") from exc
    half = psd_sqrt(g0.cov)
    middle = psd_sqrt(half @ g1.cov @ half)
    A = inv_half @ middle @ inv_half
    A = 0.5 * (A + A.T)
    return LinearMap(A, g1.mean - A @ g0.mean)
