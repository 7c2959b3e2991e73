"""
Exact and entropic transport
============================

Sinkhorn trades accuracy for speed through a blur parameter epsilon. Here
we watch the gap to the exact network-simplex cost close as epsilon shrinks.
"""

import numpy as np

from procwass import DiscreteMeasure, solve_exact, solve_sinkhorn
from procwass.transport import cost_matrix, duality_report, plan_cost

rng = np.random.default_rng(0)
mu = DiscreteMeasure(rng.normal(size=(50, 2)) * [1.0, 2.0])
nu = DiscreteMeasure(rng.normal(size=(50, 2)) * [3.0, 4.0])
C = cost_matrix(mu, nu)

# %%
# The exact plan comes with dual potentials that certify it.
exact = solve_exact(mu, nu, C)
rep = duality_report(exact, C, mu.weights, nu.weights)
print(f"exact cost {rep['primal']:.6f}, duality gap {rep['gap']:.1e}")

# %%
# Entropic plans, rounded onto the exact marginals. Smaller epsilon means
# many more iterations.
for factor in (1.0, 0.1, 0.03):
    plan = solve_sinkhorn(mu, nu, C, epsilon=factor * C.mean(), max_iter=100_000)
    cost = plan_cost(plan, C)
    print(
        f"eps = {factor:>4} mean(C): cost {cost:.6f} (+{100 * (cost / rep['primal'] - 1):.2f}%), "
        f"{plan.iterations} iterations, marginal error {plan.marginal_error:.1e}"
    )
