"""Recovering a latent Gaussian up to an orthogonal transformation.

Observations follow ``r_i = V p_i`` with ``p_i ~ N(0, Sigma)`` i.i.d. and
``V`` an unknown orthogonal matrix. Only the orbit of ``N(0, Sigma)`` under
O(d) is identifiable. Its estimate is the Frechet mean, for the
Procrustes-Wasserstein metric, of the per-batch empirical classes: the
component-wise average of the sorted square-root spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .gaussian import GaussianClass, class_distance
from .linalg import _clamped_spectrum, as_symmetric, random_orthogonal

__all__ = [
    "ObservationSet",
    "RecoveryReport",
    "empirical_covariance",
    "sqrt_spectrum",
    "frechet_mean_estimate",
    "frechet_functional",
    "bootstrap_estimate",
    "simulate_observations",
    "recovery_experiment",
    "child_seed",
]


@dataclass(frozen=True)
class ObservationSet:
    """Rows of ``samples`` are observations. ``provenance`` records the
    simulation parameters (``cov``, ``V``, ``seed``) when known."""

    samples: np.ndarray
    provenance: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        R = np.asarray(self.samples, dtype=float)
        if R.ndim == 1:
            R = R[None, :]
        if R.ndim != 2 or R.shape[0] < 1:
            raise DimensionMismatch(f"samples must be an (n, d) array with n >= 1, got {R.shape}")
        R = R.copy()
        R.setflags(write=False)
        object.__setattr__(self, "samples", R)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of one sample size in a recovery experiment.

    ``class_error`` is the distance from the averaged estimate to the true
    class; ``per_replicate_errors`` are the distances of each replicate's own
    sqrt-spectrum to the truth.
    """

    estimated_class: GaussianClass
    per_replicate_sqrt_spectra: np.ndarray
    n_per_replicate: int
    replicates: int
    true_class: GaussianClass | None = None
    class_error: float | None = None
    per_replicate_errors: np.ndarray | None = None
    mode: str = "batches"

    @property
    def mean_class_error(self) -> float | None:
        if self.per_replicate_errors is None:
            return None
        return float(np.mean(self.per_replicate_errors))

    @property
    def std_class_error(self) -> float | None:
        if self.per_replicate_errors is None:
            return None
        return float(np.std(self.per_replicate_errors))


def child_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit seed for the stream identified by ``key``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def empirical_covariance(obs: ObservationSet, center: bool = False) -> np.ndarray:
    """``(1/n) sum_i r_i r_i^T``; the model mean is zero so nothing is
    subtracted unless ``center`` is set."""
    R = obs.samples
    if center:
        R = R - R.mean(axis=0)
    S = R.T @ R / R.shape[0]
    return 0.5 * (S + S.T)


def sqrt_spectrum(S) -> np.ndarray:
    """Square roots of the ascending eigenvalues of a PSD matrix."""
    return np.sqrt(_clamped_spectrum(S).eigenvalues)


def frechet_mean_estimate(batches, center: bool = False) -> GaussianClass:
    """Average the sorted sqrt-spectra of the batches' empirical covariances."""
    batches = list(batches)
    if not batches:
        raise ValueError("need at least one batch")
    dims = {b.dim for b in batches}
    if len(dims) != 1:
        raise DimensionMismatch(f"batches have different dimensions: {sorted(dims)}")
    spectra = np.array([sqrt_spectrum(empirical_covariance(b, center)) for b in batches])
    return GaussianClass(np.sort(spectra.mean(axis=0)))


def frechet_functional(candidate: GaussianClass, spectra) -> float:
    """``sum_k d(candidate, class_k)^2`` for sorted sqrt-spectra ``spectra``."""
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    return float(np.sum((spectra - candidate.sqrt_eigenvalues) ** 2))


def bootstrap_estimate(
    obs: ObservationSet, n_boot: int = 100, seed: int = 0, center: bool = False
) -> tuple[GaussianClass, np.ndarray]:
    """Single-dataset variant: average sqrt-spectra over bootstrap resamples.

    Returns the estimated class and the ``(n_boot, d)`` resampled spectra.
    """
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    spectra = np.empty((n_boot, obs.dim))
    for b in range(n_boot):
        rng = np.random.default_rng(child_seed(seed, b))
        idx = rng.integers(0, obs.n, size=obs.n)
        resample = ObservationSet(obs.samples[idx])
        spectra[b] = sqrt_spectrum(empirical_covariance(resample, center))
    return GaussianClass(np.sort(spectra.mean(axis=0))), spectra


def simulate_observations(true_cov, V, n: int, seed: int = 0) -> ObservationSet:
    """Draw ``r_i = V p_i`` with ``p_i ~ N(0, true_cov)``.

    ``p_i`` uses the spectral factor ``P A^{1/2}`` so singular covariances
    work. The latent stream depends only on ``seed``, not on ``V``.
    """
    cov = as_symmetric(true_cov)
    V = np.asarray(V, dtype=float)
    if V.shape != cov.shape:
        raise DimensionMismatch(f"V is {V.shape} but covariance is {cov.shape}")
    if n < 1:
        raise ValueError("n must be >= 1")
    dec = _clamped_spectrum(cov)
    factor = dec.eigenvectors * np.sqrt(dec.eigenvalues)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, cov.shape[0]))
    P = Z @ factor.T
    R = P @ V.T
    return ObservationSet(R, provenance={"cov": cov, "V": V, "seed": int(seed)})


def recovery_experiment(
    true_cov, n_grid, replicates: int, seed: int = 0, restrict_special: bool = False
) -> list[RecoveryReport]:
    """Monte Carlo study of the class estimator over sample sizes.

    For each ``n`` (processed in increasing order) draw ``replicates``
    independent ``(V, batch)`` pairs, V Haar, and score the averaged estimate
    and each replicate against the true class.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    cov = as_symmetric(true_cov)
    d = cov.shape[0]
    truth = GaussianClass(sqrt_spectrum(cov))
    reports = []
    for n in sorted(int(n) for n in n_grid):
        batches = []
        for r in range(replicates):
            V = random_orthogonal(d, child_seed(seed, n, r, 0), restrict_special)
            batches.append(simulate_observations(cov, V.matrix, n, child_seed(seed, n, r, 1)))
        spectra = np.array([sqrt_spectrum(empirical_covariance(b)) for b in batches])
        estimate = GaussianClass(np.sort(spectra.mean(axis=0)))
        errors = np.linalg.norm(spectra - truth.sqrt_eigenvalues, axis=1)
        reports.append(
            RecoveryReport(
                estimated_class=estimate,
                per_replicate_sqrt_spectra=spectra,
                n_per_replicate=n,
                replicates=replicates,
                true_class=truth,
                class_error=class_distance(estimate, truth),
                per_replicate_errors=errors,
            )
        )
    return reports

