"""Supports, exchange cycles, and the improvement step.

Sending everything across the diagonal when moving costs |x - y| is
wasteful.  The support of that plan contains a negative exchange cycle,
and moving a little mass along the cycle lowers the cost.
"""

import numpy as np

from capacity_ot import (
    CH_STAR,
    GroundSet,
    TransportPlan,
    additive_from_weights,
    improve_plan,
    is_c_cyclically_monotone,
    marginals,
    support,
)

X, Y = GroundSet.of_size(2, "x"), GroundSet.of_size(2, "y")
cost = np.array([[0.0, 1.0], [1.0, 0.0]])
anti = TransportPlan(additive_from_weights([0, 0.5, 0.5, 0], GroundSet.product(X, Y)), (2, 2), CH_STAR)

S = support(anti)
rep = is_c_cyclically_monotone(S, cost)
print("support:", S.points)
print("cyclically monotone:", rep.monotone, " cycle weight:", rep.cycle_weight)

# each step halves the mass left on the anti-diagonal; the cycle persists
# because the improved plans keep some of it
plan = anti
for _ in range(5):
    rep = is_c_cyclically_monotone(support(plan), cost)
    if rep.monotone:
        break
    step = improve_plan(plan, rep.cycle, cost)
    print(f"alpha={step.alpha:.4f}: cost {step.cost_before:.4f} -> {step.cost_after:.4f}")
    plan = step.gamma

mx, my = marginals(plan)
print("marginals unchanged:", np.allclose(mx.values, [0, 0.5, 0.5, 1]), np.allclose(my.values, [0, 0.5, 0.5, 1]))
