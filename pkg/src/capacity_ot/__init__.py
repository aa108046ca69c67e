"""Kantorovich optimal transport for capacities on finite ground sets."""

from .choquet import (
    RandomVariable,
    are_comonotone,
    capacity_from_functional,
    choquet_integral,
    choquet_integral_over,
    choquet_quadrature,
)
from .cyclic import Cycle, SupportSet, improve_plan, is_c_cyclically_monotone, min_cycle_weight, support
from .duality import (
    PotentialPair,
    check_cm,
    dual_objective,
    is_dual_feasible,
    potentials_from_monotone_set,
    solve_dual,
)
from .linprog import LinearProgram, lp_solve
from .setfunc import (
    Capacity,
    DistortionSpec,
    GroundSet,
    additive_from_weights,
    capacity_distance,
    capacity_from_values,
    classify,
    conditional,
    distorted,
    product,
    push_forward,
)
from .transport import (
    CH,
    CH_STAR,
    TransportInstance,
    TransportPlan,
    build_lp,
    classical_ot_oracle,
    distorted_product_plan,
    is_transport_plan,
    marginals,
    plan_cost,
    plan_from_map,
    solve_optimal,
)

__version__ = "0.1.0"
