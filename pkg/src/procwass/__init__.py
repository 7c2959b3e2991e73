"""Procrustes-Wasserstein distances."""

__version__ = "0.1.0"

from .gaussian import (  # noqa: E402
    GaussianClass,
    GaussianDistribution,
    bures_w2,
    canonical_class,
    class_distance,
    gaussian_F,
    monge_map,
    pw_gaussian,
)
from .linalg import OrthogonalMatrix, random_orthogonal, sym_eigen  # noqa: E402
from .procrustes import AlignConfig, pw_empirical  # noqa: E402
from .recovery import frechet_mean_estimate, recovery_experiment, simulate_observations  # noqa: E402
from .transport import DiscreteMeasure, solve_exact, solve_sinkhorn  # noqa: E402

__all__ = [
    "AlignConfig",
    "DiscreteMeasure",
    "GaussianClass",
    "GaussianDistribution",
    "OrthogonalMatrix",
    "bures_w2",
    "canonical_class",
    "class_distance",
    "frechet_mean_estimate",
    "gaussian_F",
    "monge_map",
    "pw_empirical",
    "pw_gaussian",
    "random_orthogonal",
    "recovery_experiment",
    "simulate_observations",
    "solve_exact",
    "solve_sinkhorn",
    "sym_eigen",
]
