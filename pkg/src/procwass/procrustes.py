"""Procrustes-Wasserstein distance between discrete measures.

The distance is ``min_theta W2(theta # X_c, Y_c)`` over orthogonal ``theta``,
with ``X_c`` and ``Y_c`` the centered measures. It is computed by block
coordinate descent: optimal transport at fixed ``theta``, then an orthogonal
Procrustes update at fixed plan, from several initializations.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import OrthogonalMatrix, polar_orthogonal_factor, random_orthogonal, sym_eigen
from .transport import (
    DiscreteMeasure,
    TransportPlan,
    cost_matrix,
    plan_cost,
    solve_exact,
    solve_sinkhorn,
)

__all__ = ["AlignConfig", "PWResult", "center", "initial_starts", "procrustes_step", "pw_empirical"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlignConfig:
    """Settings for :func:`pw_empirical`.

    ``num_restarts`` counts the identity start plus ``num_restarts - 1``
    Haar-random starts, each also tried transposed; the covariance-eigenbasis
    starts are always added on top. Clouds larger than ``screen_size`` points are first aligned on a
    seeded subsample of that size, and only the best start is refined on the
    full data. ``screen_size=None`` disables screening.
    """

    restrict_special: bool = False
    num_restarts: int = 4
    max_outer_iter: int = 200
    rel_tol: float = 1e-9
    ot_backend: str = "exact"
    epsilon: float | None = None
    seed: int = 0
    screen_size: int | None = 500

    def __post_init__(self):
        if self.num_restarts < 1:
            raise ValueError("num_restarts must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be >= 1")
        if self.ot_backend not in ("exact", "sinkhorn"):
            raise ValueError(f"unknown ot_backend {self.ot_backend!r}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class PWResult:
    distance: float
    theta_star: OrthogonalMatrix
    plan: TransportPlan
    translation: np.ndarray
    trace: tuple
    converged: bool
    start: str = ""
    start_objectives: dict = field(default_factory=dict, repr=False)


def center(m: DiscreteMeasure):
    """Shift ``m`` to zero weighted mean. Returns ``(centered, mean)``."""
    mean = m.mean()
    return DiscreteMeasure(m.points - mean, m.weights), mean


def _cross_moment(X: DiscreteMeasure, Y: DiscreteMeasure, plan) -> np.ndarray:
    P = plan.coupling if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=float)
    if P.shape != (X.n, Y.n):
        raise DimensionMismatch(f"plan shape {P.shape} does not match ({X.n}, {Y.n})")
    return X.points.T @ (P @ Y.points)


def procrustes_step(
    X: DiscreteMeasure, Y: DiscreteMeasure, plan, restrict_special: bool = False
) -> OrthogonalMatrix:
    """Minimize ``sum_ij P_ij ||theta x_i - y_j||^2`` over orthogonal ``theta``.

    The minimizer is the orthogonal polar factor of ``sum_ij P_ij x_i y_j^T``.
    """
    if X.dim != Y.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {X.dim} vs {Y.dim}")
    return polar_orthogonal_factor(_cross_moment(X, Y, plan), restrict_special)


def _solve(X, Y, C, cfg: AlignConfig) -> TransportPlan:
    if cfg.ot_backend == "exact":
        return solve_exact(X, Y, C)
    return solve_sinkhorn(X, Y, C, epsilon=cfg.epsilon)


@dataclass
class _Run:
    theta: np.ndarray
    plan: TransportPlan
    objective: float
    trace: list
    converged: bool


def _descend(X: DiscreteMeasure, Y: DiscreteMeasure, theta0: np.ndarray, cfg: AlignConfig) -> _Run:
    theta = np.asarray(theta0, dtype=float)
    best = None
    trace = []
    converged = False
    for _ in range(cfg.max_outer_iter):
        C = cost_matrix(X.transform(theta), Y)
        plan = _solve(X, Y, C, cfg)
        obj = plan_cost(plan, C)
        if best is not None and obj > best.objective:
            # no progress (or an entropic-backend uptick): keep the better iterate
            converged = True
            break
        prev = best.objective if best is not None else None
        best = _Run(theta, plan, obj, trace, False)
        trace.append(obj)
        if obj == 0.0 or (prev is not None and prev - obj <= cfg.rel_tol * prev):
            converged = True
            break
        theta = procrustes_step(X, Y, plan, cfg.restrict_special).matrix
    best.converged = converged
    return best


def _eigen_starts(X: DiscreteMeasure, Y: DiscreteMeasure, restrict_special: bool):
    """Starts that map the principal axes of X onto those of Y.

    All eigenvector sign patterns are tried up to d = 3; above that only the
    canonical orientation. The reversed product ``P0^T P1`` is added as well.
    """
    P0 = sym_eigen(X.covariance()).eigenvectors
    P1 = sym_eigen(Y.covariance()).eigenvectors
    d = X.dim
    patterns = itertools.product((1.0, -1.0), repeat=d) if d <= 3 else [(1.0,) * d]
    starts = []
    for k, signs in enumerate(patterns):
        theta = (P1 * np.asarray(signs)) @ P0.T
        if restrict_special and np.linalg.det(theta) < 0:
            continue
        starts.append((f"eigen{k}", theta))
    flipped = P0.T @ P1
    if restrict_special and np.linalg.det(flipped) < 0:
        flipped = P0.T @ (P1 * np.r_[-1.0, np.ones(d - 1)])
    starts.append(("eigen-transposed", flipped))
    return starts


def initial_starts(X: DiscreteMeasure, Y: DiscreteMeasure, cfg: AlignConfig | None = None):
    """The ``(name, theta)`` pairs :func:`pw_empirical` descends from.

    ``X`` and ``Y`` should be centered. The set is closed under transposition
    up to the eigenbasis sign patterns, which keeps the search symmetric in
    its two arguments.
    """
    cfg = cfg or AlignConfig()
    d = X.dim
    starts = [("identity", np.eye(d))]
    starts += _eigen_starts(X, Y, cfg.restrict_special)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.num_restarts - 1)
    for k, ss in enumerate(seeds):
        seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        Q = random_orthogonal(d, seed, cfg.restrict_special).matrix
        # descending from Q on (X, Y) mirrors descending from Q^T on (Y, X);
        # with both in the set the two directions explore the same starts
        starts.append((f"haar{k}", Q))
        starts.append((f"haar{k}T", Q.T.copy()))
    return starts


def _max_workers(n_tasks: int) -> int:
    cap = os.environ.get("PROCWASS_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def _run_starts(X, Y, starts, cfg):
    workers = _max_workers(len(starts))
    if workers == 1:
        runs = [_descend(X, Y, th, cfg) for _, th in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda s: _descend(X, Y, s[1], cfg), starts))
    return runs


def _pick(runs):
    # lowest objective, ties to the earliest start
    return min(range(len(runs)), key=lambda k: (runs[k].objective, k))


def pw_empirical(
    X: DiscreteMeasure, Y: DiscreteMeasure, cfg: AlignConfig | None = None, starts=None
) -> PWResult:
    """Procrustes-Wasserstein distance between two weighted point clouds.

    Both clouds are centered first; the optimal translation for the returned
    ``theta_star`` is ``theta_star @ mean(X) - mean(Y)``. Each start runs
    alternating OT / Procrustes updates until the relative decrease of the
    objective falls below ``cfg.rel_tol``. The best start wins.

    ``starts`` replaces the default initializations from
    :func:`initial_starts`; it may hold ``(name, theta)`` pairs or bare
    matrices.

    No global optimality guarantee: the problem is nonconvex.
    """
    cfg = cfg or AlignConfig()
    if X.dim != Y.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {X.dim} vs {Y.dim}")
    Xc, mx = center(X)
    Yc, my = center(Y)
    if starts is None:
        starts = initial_starts(Xc, Yc, cfg)
    else:
        starts = [
            s if isinstance(s, tuple) else (f"user{k}", np.asarray(s, dtype=float))
            for k, s in enumerate(starts)
        ]
        if not starts:
            raise ValueError("starts must not be empty")
    names = [name for name, _ in starts]

    screen = cfg.screen_size is not None and max(X.n, Y.n) > cfg.screen_size
    if screen:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
        Xs = Xc.subsample(min(cfg.screen_size, X.n), rng) if X.n > cfg.screen_size else Xc
        Ys = Yc.subsample(min(cfg.screen_size, Y.n), rng) if Y.n > cfg.screen_size else Yc
        Xs, _ = center(Xs)
        Ys, _ = center(Ys)
        screened = _run_starts(Xs, Ys, starts, cfg)
        k = _pick(screened)
        logger.info("screening picked start %s (objective %.6g)", names[k], screened[k].objective)
        refined = _descend(Xc, Yc, screened[k].theta, cfg)
        objectives = {n: r.objective for n, r in zip(names, screened)}
        chosen = refined
        start_name = names[k]
        # identity is always feasible on the full data; never return worse than it
        ident = _descend(Xc, Yc, np.eye(X.dim), AlignConfig(**{**cfg.__dict__, "max_outer_iter": 1}))
        if ident.objective < refined.objective:
            chosen = _descend(Xc, Yc, np.eye(X.dim), cfg)
            start_name = "identity"
    else:
        runs = _run_starts(Xc, Yc, starts, cfg)
        k = _pick(runs)
        chosen = runs[k]
        start_name = names[k]
        objectives = {n: r.objective for n, r in zip(names, runs)}

    theta = OrthogonalMatrix(chosen.theta)
    return PWResult(
        distance=float(np.sqrt(max(chosen.objective, 0.0))),
        theta_star=theta,
        plan=chosen.plan,
        translation=theta.matrix @ mx - my,
        trace=tuple(chosen.trace),
        converged=chosen.converged,
        start=start_name,
        start_objectives=objectives,
    )
