"""Discrete optimal transport with squared Euclidean ground cost.

Two solvers are provided: :func:`solve_exact` (network simplex, via POT's
C++ implementation) and :func:`solve_sinkhorn` (entropic regularization,
log-domain from the first iteration).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleWeights,
    NonFinite,
    NotConverged,
    NumericalOverflow,
)

__all__ = [
    "DiscreteMeasure",
    "TransportPlan",
    "cost_matrix",
    "solve_exact",
    "solve_sinkhorn",
    "plan_cost",
    "round_to_marginals",
    "duality_report",
]

WEIGHT_TOL = 1e-9
MARGINAL_TOL = 1e-6


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud. Weights are renormalized to sum to one."""

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatch(f"points must be an (n, d) array with n >= 1, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise NonFinite("points have NaN or Inf entries")
        if self.weights is None:
            w = np.full(X.shape[0], 1.0 / X.shape[0])
        else:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape[0] != X.shape[0]:
                raise DimensionMismatch(f"{w.shape[0]} weights for {X.shape[0]} points")
            if not np.all(np.isfinite(w)):
                raise NonFinite("weights have NaN or Inf entries")
            if np.any(w < 0):
                raise InfeasibleWeights("weights must be non-negative")
            total = w.sum()
            if total <= 0:
                raise InfeasibleWeights("weights must have positive total mass")
            w = w / total
        object.__setattr__(self, "points", _ro(X))
        object.__setattr__(self, "weights", _ro(w))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def covariance(self) -> np.ndarray:
        """Weighted covariance about the weighted mean."""
        Xc = self.points - self.mean()
        return (Xc * self.weights[:, None]).T @ Xc

    def transform(self, A, offset=None) -> "DiscreteMeasure":
        """Push forward by ``x -> A @ x + offset``."""
        Y = self.points @ np.asarray(A, dtype=float).T
        if offset is not None:
            Y = Y + np.asarray(offset, dtype=float)
        return DiscreteMeasure(Y, self.weights)

    def subsample(self, size: int, rng: np.random.Generator) -> "DiscreteMeasure":
        idx = np.sort(rng.choice(self.n, size=size, replace=False))
        return DiscreteMeasure(self.points[idx], self.weights[idx])


@dataclass(frozen=True)
class TransportPlan:
    """Coupling between two discrete measures.

    ``solver`` is ``"exact"`` or ``"sinkhorn"``; ``epsilon`` is set for the
    latter. ``marginal_error`` is the max L1 marginal violation of
    ``coupling``. For Sinkhorn, ``converged`` and ``iterations`` describe the
    scaling loop before rounding, and ``cost_trace`` holds per-iteration costs
    when requested.
    """

    coupling: np.ndarray
    dual_potentials: tuple | None = None
    solver: str = "exact"
    epsilon: float | None = None
    converged: bool = True
    iterations: int = 0
    marginal_error: float = 0.0
    cost_trace: tuple = field(default=(), repr=False)

    @property
    def solver_tag(self) -> str:
        if self.solver == "sinkhorn":
            return f"sinkhorn({self.epsilon!r})"
        return self.solver


def cost_matrix(X: DiscreteMeasure, Y: DiscreteMeasure) -> np.ndarray:
    """``C[i, j] = ||x_i - y_j||^2``.

    Accumulated coordinate by coordinate from differences, so
    ``cost_matrix(Y, X)`` is exactly ``cost_matrix(X, Y).T``.
    """
    Xp = X.points if isinstance(X, DiscreteMeasure) else np.atleast_2d(np.asarray(X, float))
    Yp = Y.points if isinstance(Y, DiscreteMeasure) else np.atleast_2d(np.asarray(Y, float))
    if Xp.shape[1] != Yp.shape[1]:
        raise DimensionMismatch(f"ambient dimensions differ: {Xp.shape[1]} vs {Yp.shape[1]}")
    C = np.zeros((Xp.shape[0], Yp.shape[0]))
    for k in range(Xp.shape[1]):
        diff = Xp[:, k, None] - Yp[None, :, k]
        diff *= diff
        C += diff
    return C


def _check_shapes(mu, nu, C):
    C = np.asarray(C, dtype=float)
    if C.shape != (mu.n, nu.n):
        raise DimensionMismatch(f"cost matrix {C.shape} does not match measures ({mu.n}, {nu.n})")
    if not np.all(np.isfinite(C)):
        raise NonFinite("cost matrix has NaN or Inf entries")
    return C


def _lse(M, axis):
    m = M.max(axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (m + np.log(np.exp(M - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def _marginal_error(P, a, b) -> float:
    return max(float(np.abs(P.sum(axis=1) - a).sum()), float(np.abs(P.sum(axis=0) - b).sum()))


def _pot_emd():
    # keep POT from importing torch/jax/tensorflow backends we never use
    for name in ("PYTORCH", "JAX", "CUPY", "TENSORFLOW"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{name}", "1")
    from ot.lp import emd

    return emd


def solve_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, C=None) -> TransportPlan:
    """Exact Kantorovich plan by network simplex.

    Dual potentials are returned with the plan and optimality is certified
    by complementary slackness (see :func:`duality_report`).

    Raises
    ------
    InfeasibleWeights
        If the solver reports an infeasible or unbounded problem.
    NotConverged
        If the simplex hits its iteration cap or the certificate fails.
    """
    if C is None:
        C = cost_matrix(mu, nu)
    C = _check_shapes(mu, nu, C)
    a, b = mu.weights, nu.weights
    if mu.n == 1 or nu.n == 1:
        P = np.outer(a, b)
        # duals: u + v = C on the support; choose v = C[0] when n == 1
        if mu.n == 1:
            u, v = np.zeros(1), C[0].copy()
        else:
            u, v = C[:, 0].copy(), np.zeros(1)
        return TransportPlan(P, (u, v), "exact", marginal_error=_marginal_error(P, a, b))
    emd = _pot_emd()
    b_adj = b * (a.sum() / b.sum())
    P, log = emd(
        np.ascontiguousarray(a),
        np.ascontiguousarray(b_adj),
        np.ascontiguousarray(C),
        numItermax=max(100_000, 100 * mu.n * nu.n),
        log=True,
    )
    code = log.get("result_code", 1)
    if code == 0:
        raise InfeasibleWeights(f"network simplex reported an infeasible problem: {log.get('warning')}")
    if code == 2:
        raise InfeasibleWeights(f"network simplex reported an unbounded problem: {log.get('warning')}")
    if code == 3:
        raise NotConverged(f"network simplex hit its iteration cap: {log.get('warning')}")
    P = np.asarray(P, dtype=float)
    u = np.asarray(log["u"], dtype=float)
    v = np.asarray(log["v"], dtype=float)
    plan = TransportPlan(P, (u, v), "exact", marginal_error=_marginal_error(P, a, b))
    rep = duality_report(plan, C, a, b)
    scale = 1.0 + abs(rep["primal"]) + float(np.max(np.abs(C)))
    if rep["gap"] > 1e-7 * (1.0 + abs(rep["primal"])) or rep["violation"] > 1e-7 * scale:
        raise NotConverged(
            f"exact plan failed its optimality certificate (gap {rep['gap']:.3e}, "
            f"dual violation {rep['violation']:.3e})",
            violation=rep["violation"],
        )
    return plan


def duality_report(plan: TransportPlan, C, a, b) -> dict:
    """Primal cost, dual objective, duality gap and complementary slackness.

    ``violation`` is the largest amount by which ``u_i + v_j`` exceeds
    ``C_ij``; ``slackness`` is the largest ``|C_ij - u_i - v_j|`` over the
    support of the coupling.
    """
    if plan.dual_potentials is None:
        raise ValueError("plan carries no dual potentials")
    u, v = plan.dual_potentials
    C = np.asarray(C, dtype=float)
    primal = float(np.sum(plan.coupling * C))
    dual = float(a @ u + b @ v)
    reduced = C - u[:, None] - v[None, :]
    support = plan.coupling > 1e-14
    return {
        "primal": primal,
        "dual": dual,
        "gap": abs(primal - dual),
        "violation": float(max(0.0, -reduced.min())),
        "slackness": float(np.abs(reduced[support]).max()) if support.any() else 0.0,
    }


def round_to_marginals(P, a, b) -> np.ndarray:
    """Project a nonnegative matrix onto the transport polytope.

    Rows are scaled down to at most ``a``, then columns to at most ``b``, and
    the remaining mass is added back as a rank-one correction.
    """
    P = np.array(P, dtype=float)
    rows = P.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(rows > 0, np.minimum(a / rows, 1.0), 1.0)
    P *= x[:, None]
    cols = P.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(cols > 0, np.minimum(b / cols, 1.0), 1.0)
    P *= y[None, :]
    err_a = a - P.sum(axis=1)
    err_b = b - P.sum(axis=0)
    mass = err_a.sum()
    if mass > 0:
        P += np.outer(err_a, err_b) / mass
    return P


def solve_sinkhorn(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    C=None,
    epsilon: float | None = None,
    max_iter: int = 10_000,
    tol: float = 1e-9,
    strict: bool = False,
    track_cost: bool = False,
) -> TransportPlan:
    """Entropic OT by log-domain Sinkhorn iterations.

    Iterates dual potentials ``f``, ``g`` until the L1 violation of the row
    marginal (columns are exact after each ``g`` update) drops below ``tol``,
    then rounds the plan onto the exact marginals.

    Parameters
    ----------
    epsilon : float, optional
        Regularization strength, in the units of ``C``. Defaults to
        ``0.05 * mean(C)``.
    strict : bool
        Raise :class:`NotConverged` instead of returning a plan flagged
        ``converged=False`` when ``max_iter`` is exhausted.
    track_cost : bool
        Record, after every iteration, the transport cost of the current
        plan rounded onto the marginals, in ``cost_trace``.
    """
    if C is None:
        C = cost_matrix(mu, nu)
    C = _check_shapes(mu, nu, C)
    a, b = mu.weights, nu.weights
    if epsilon is None:
        epsilon = 0.05 * float(C.mean())
        if epsilon <= 0:
            epsilon = 1.0
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    with np.errstate(divide="ignore"):
        loga = np.log(a)
        logb = np.log(b)
    f = np.zeros(mu.n)
    g = np.zeros(nu.n)
    K = -C / epsilon
    violation = math.inf
    trace = []
    it = 0
    row_lse = _lse(K, axis=1)
    for it in range(1, max_iter + 1):
        f = epsilon * (loga - row_lse)
        g = epsilon * (logb - _lse(K + f[:, None] / epsilon, axis=0))
        if not (np.all(np.isfinite(f[a > 0])) and np.all(np.isfinite(g[b > 0]))):
            raise NumericalOverflow("non-finite Sinkhorn potentials")
        row_lse = _lse(K + g[None, :] / epsilon, axis=1)
        violation = float(np.abs(np.exp(f / epsilon + row_lse) - a).sum())
        if track_cost:
            P = round_to_marginals(np.exp(K + (f[:, None] + g[None, :]) / epsilon), a, b)
            trace.append(float(np.sum(P * C)))
        if violation < tol:
            break
    converged = violation < tol
    if strict and not converged:
        raise NotConverged(
            f"Sinkhorn did not reach tol={tol:g} in {max_iter} iterations "
            f"(final marginal violation {violation:.3e})",
            violation=violation,
        )
    P = np.exp(K + (f[:, None] + g[None, :]) / epsilon)
    P = round_to_marginals(P, a, b)
    return TransportPlan(
        P,
        (f, g),
        "sinkhorn",
        epsilon=float(epsilon),
        converged=converged,
        iterations=it,
        marginal_error=_marginal_error(P, a, b),
        cost_trace=tuple(trace),
    )


def plan_cost(plan: TransportPlan, C) -> float:
    """``sum_ij coupling_ij * C_ij``; the squared W2 distance for an exact plan."""
    C = np.asarray(C, dtype=float)
    coupling = plan.coupling if isinstance(plan, TransportPlan) else np.asarray(plan, float)
    if coupling.shape != C.shape:
        raise DimensionMismatch(f"plan {coupling.shape} and cost {C.shape} differ in shape")
    return float(np.sum(coupling * C))
