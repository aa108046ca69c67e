"""Kantorovich transport between capacities on finite ground sets.

Plans are capacities on the product ``X x Y`` with the row-major element
order ``(i, j) -> i * m + j``.  Because the cost of a plan is a Choquet
integral of a fixed integrand, it is linear in the plan's values, so the
optimal plan over the whole subset lattice is an LP solution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog as _scipy_linprog

from .choquet import choquet_integral, choquet_rows
from .errors import GroundMismatchError, SizeGuardError, SolverError
from .linprog import EQ, LE, LinearProgram, LpSolution, lp_solve
from .setfunc import (
    Capacity,
    GroundSet,
    additive_from_weights,
    capacity_from_values,
    classify,
    _check_weights,
    _subset_sums,
)

CH, CH_STAR = "ch", "ch-star"
CLASSES = (CH, CH_STAR)
STORAGE_GUARD = 16
GUARDS = {CH: 16, CH_STAR: 12}
SUPERMODULAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransportInstance:
    X: GroundSet
    Y: GroundSet
    cost: np.ndarray
    mu: Capacity
    nu: Capacity
    max_cells: int = STORAGE_GUARD

    def __post_init__(self):
        cost = np.array(self.cost, dtype=float)
        if cost.shape != (self.X.n, self.Y.n):
            raise GroundMismatchError(f"cost has shape {cost.shape}, expected {(self.X.n, self.Y.n)}")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValueError("cost entries must be finite and nonnegative")
        if self.mu.ground != self.X or self.nu.ground != self.Y:
            raise GroundMismatchError("marginals do not live on X and Y")
        if self.X.n * self.Y.n > self.max_cells:
            raise SizeGuardError(f"product of size {self.X.n * self.Y.n} exceeds the storage guard {self.max_cells}")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.n, self.Y.n

    @property
    def product_ground(self) -> GroundSet:
        return GroundSet.product(self.X, self.Y)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    plan: Capacity
    shape: tuple
    class_tag: str = CH

    def __post_init__(self):
        n, m = self.shape
        if self.plan.n != n * m:
            raise GroundMismatchError(f"plan on {self.plan.n} points cannot have shape {self.shape}")
        if self.class_tag not in CLASSES:
            raise ValueError(f"unknown plan class {self.class_tag!r}")
        if self.class_tag == CH_STAR and not classify(self.plan, SUPERMODULAR_TOL).supermodular:
            raise ValueError("plan tagged ch-star is not supermodular")

    @property
    def values(self) -> np.ndarray:
        return self.plan.values


def rectangle_row_masks(n: int, m: int) -> np.ndarray:
    """``out[A]`` is the product mask of ``A x Y``."""
    row = (1 << m) - 1
    A = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        out |= ((A >> i) & 1) * (row << (i * m))
    return out


def rectangle_col_masks(n: int, m: int) -> np.ndarray:
    """``out[B]`` is the product mask of ``X x B``."""
    B = np.arange(1 << m, dtype=np.int64)
    out = np.zeros(1 << m, dtype=np.int64)
    for i in range(n):
        out |= B << (i * m)
    return out


def marginals(pi: TransportPlan) -> tuple[Capacity, Capacity]:
    n, m = pi.shape
    labels = pi.plan.ground.labels
    X = GroundSet(tuple(labels[i * m][0] for i in range(n))) if _is_pairs(labels) else GroundSet.of_size(n, "x")
    Y = GroundSet(tuple(labels[j][1] for j in range(m))) if _is_pairs(labels) else GroundSet.of_size(m, "y")
    v = pi.values
    return (
        capacity_from_values(X, v[rectangle_row_masks(n, m)]),
        capacity_from_values(Y, v[rectangle_col_masks(n, m)]),
    )


def _is_pairs(labels) -> bool:
    return all(isinstance(l, tuple) and len(l) == 2 for l in labels)


@dataclass
class PlanCheck:
    feasible: bool
    worst_violation: float
    worst_side: str | None = None
    worst_mask: int | None = None
    functional_violation: float = 0.0

    def __bool__(self):
        return self.feasible


def is_transport_plan(pi: TransportPlan, mu: Capacity, nu: Capacity, tol: float = 1e-12,
                      n_functional: int = 50, seed: int = 0) -> PlanCheck:
    """Check both marginal identities on every subset.

    As a cross-check, the integral of a cylinder lift ``u(x)`` (resp.
    ``w(y)``) against the plan is compared with the integral of ``u``
    against ``mu`` (resp. ``w`` against ``nu``) for random ``u``, ``w``.
    """
    n, m = pi.shape
    if mu.n != n or nu.n != m:
        raise GroundMismatchError(f"marginal sizes ({mu.n}, {nu.n}) do not match plan shape {pi.shape}")
    dx = np.abs(pi.values[rectangle_row_masks(n, m)] - mu.values)
    dy = np.abs(pi.values[rectangle_col_masks(n, m)] - nu.values)
    worst = max(dx.max(), dy.max())
    if dx.max() >= dy.max():
        side, mask = "X", int(np.argmax(dx))
    else:
        side, mask = "Y", int(np.argmax(dy))

    rng = np.random.default_rng(seed)
    U = rng.uniform(-1.0, 1.0, size=(n_functional, n))
    W = rng.uniform(-1.0, 1.0, size=(n_functional, m))
    lift_u = np.repeat(U, m, axis=1)
    lift_w = np.tile(W, (1, n))
    fx = np.abs(choquet_rows(lift_u, pi.values) - choquet_rows(U, mu.values)).max(initial=0.0)
    fy = np.abs(choquet_rows(lift_w, pi.values) - choquet_rows(W, nu.values)).max(initial=0.0)
    func = float(max(fx, fy))
    # a marginal error of tol moves each sorted increment by at most 2 tol
    func_tol = 2 * max(n, m) * tol + 1e-13
    return PlanCheck(bool(worst <= tol and func <= func_tol), float(worst), side, mask, func)


@dataclass(frozen=True)
class CostLevels:
    thresholds: np.ndarray  # distinct positive costs, increasing
    weights: np.ndarray  # t_k - t_{k-1}
    masks: np.ndarray  # superlevel set {c >= t_k}


def cost_levels(cost: np.ndarray) -> CostLevels:
    flat = np.asarray(cost, dtype=float).reshape(-1)
    t = np.unique(flat[flat > 0])
    weights = np.diff(t, prepend=0.0)
    bits = 1 << np.arange(flat.size)
    masks = np.array([int(np.sum(bits[flat >= level])) for level in t], dtype=np.int64)
    return CostLevels(t, weights, masks)


def plan_cost(inst: TransportInstance, pi: TransportPlan) -> float:
    """Choquet integral of the row-major flattened cost against the plan."""
    _check_shape(inst, pi)
    return choquet_integral(inst.cost.reshape(-1), pi.plan)


def plan_cost_levels(inst: TransportInstance, pi: TransportPlan) -> float:
    """The same cost through its level-set linear form."""
    _check_shape(inst, pi)
    lv = cost_levels(inst.cost)
    return float(lv.weights @ pi.values[lv.masks])


def _check_shape(inst, pi):
    if tuple(pi.shape) != inst.shape:
        raise GroundMismatchError(f"plan shape {pi.shape} does not match instance shape {inst.shape}")


def distorted_product_plan(P, Q, alpha: float, X: GroundSet | None = None,
                           Y: GroundSet | None = None) -> TransportPlan:
    """``(P x Q)^alpha``, a supermodular plan for the marginals ``P^alpha``, ``Q^alpha``."""
    if not np.isfinite(alpha) or alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    P, Q = _check_weights(P), _check_weights(Q)
    X = X or GroundSet.of_size(len(P), "x")
    Y = Y or GroundSet.of_size(len(Q), "y")
    n, m = len(P), len(Q)
    sums = _subset_sums(np.outer(P, Q).reshape(-1))
    # rectangles from the marginal subset sums, so that the marginals of the
    # plan are bit-identical to the distorted marginals
    pa, qb = _subset_sums(P), _subset_sums(Q)
    pa[-1] = qb[-1] = 1.0
    rect = rectangle_row_masks(n, m)[:, None] & rectangle_col_masks(n, m)[None, :]
    sums[rect] = np.outer(pa, qb)
    sums = np.clip(sums, 0.0, 1.0)
    sums[-1] = 1.0
    plan = capacity_from_values(GroundSet.product(X, Y), sums ** alpha)
    return TransportPlan(plan, (n, m), CH_STAR)


def plan_from_map(mu: Capacity, T, Y: GroundSet) -> TransportPlan:
    """``pi_T(W) = mu({x : (x, T(x)) in W})``."""
    n, m = mu.n, Y.n
    T = np.asarray(T, dtype=np.int64)
    if T.shape != (n,) or np.any(T < 0) or np.any(T >= m):
        raise ValueError("map must send every point of X into Y")
    W = np.arange(1 << (n * m), dtype=np.int64)
    pre = np.zeros_like(W)
    for i in range(n):
        pre |= ((W >> (i * m + int(T[i]))) & 1) << i
    plan = capacity_from_values(GroundSet.product(mu.ground, Y), mu.values[pre])
    tag = CH_STAR if classify(plan, SUPERMODULAR_TOL).supermodular else CH
    return TransportPlan(plan, (n, m), tag)


def lp_size(n: int, m: int, cls: str) -> tuple[int, int]:
    """(rows, columns) of the transport LP, bounds excluded."""
    N = n * m
    rows = N * 2 ** (N - 1) + (2 ** n - 2) + (2 ** m - 2)
    if cls == CH_STAR:
        rows += N * (N - 1) // 2 * 2 ** max(N - 2, 0)
    return rows, 2 ** N


def build_lp(inst: TransportInstance, cls: str = CH_STAR, max_cells: int | None = None) -> LinearProgram:
    """Program over the plan's values at every product mask.

    Rows, in order: monotonicity on covers, X-marginal equalities,
    Y-marginal equalities, and for ``ch-star`` the local supermodularity
    inequalities.  The empty and full sets are fixed through bounds.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown plan class {cls!r}")
    n, m = inst.shape
    N = n * m
    guard = GUARDS[cls] if max_cells is None else max_cells
    if max_cells is not None and max_cells > GUARDS[cls]:
        warnings.warn(f"size guard for {cls} raised to {max_cells} cells", RuntimeWarning, stacklevel=2)
    if N > guard:
        rows, cols = lp_size(n, m, cls)
        raise SizeGuardError(
            f"{n}x{m} {cls} program needs {cols} columns and {rows} rows; guard is {guard} cells",
            rows, cols)
    V = 1 << N
    masks = np.arange(V, dtype=np.int64)
    lp = LinearProgram(V, "min")
    lp.set_bounds(slice(None), 0.0, 1.0)
    lp.set_bounds(0, 0.0, 0.0)
    lp.set_bounds(V - 1, 1.0, 1.0)

    for e in range(N):
        S = masks[(masks >> e & 1) == 0]
        r = np.arange(len(S))
        lp.add_rows(np.concatenate([r, r]), np.concatenate([S, S | (1 << e)]),
                    np.concatenate([np.ones(len(S)), -np.ones(len(S))]), LE, np.zeros(len(S)))

    for rect, cap in ((rectangle_row_masks(n, m), inst.mu), (rectangle_col_masks(n, m), inst.nu)):
        inner = np.arange(1, len(rect) - 1)
        if len(inner):
            lp.add_rows(np.arange(len(inner)), rect[inner], np.ones(len(inner)), EQ, cap.values[inner])

    if cls == CH_STAR:
        for e in range(N):
            for f in range(e + 1, N):
                be, bf = 1 << e, 1 << f
                S = masks[(masks & (be | bf)) == 0]
                r = np.arange(len(S))
                lp.add_rows(
                    np.tile(r, 4),
                    np.concatenate([S | be, S, S | be | bf, S | bf]),
                    np.repeat([1.0, -1.0, -1.0, 1.0], len(S)),
                    LE, np.zeros(len(S)),
                )

    lv = cost_levels(inst.cost)
    np.add.at(lp.c, lv.masks, lv.weights)
    return lp


def monotone_repair(values: np.ndarray, n: int) -> np.ndarray:
    """Smallest monotone majorant after clipping to [0, 1] (removes LP round-off)."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    v[0], v[-1] = 0.0, 1.0
    masks = np.arange(len(v))
    for i in range(n):
        hi = masks[(masks >> i & 1) == 1]
        v[hi] = np.maximum(v[hi], v[hi ^ (1 << i)])
    return v


@dataclass
class TransportSolution:
    status: str  # "optimal" | "infeasible"
    plan: TransportPlan | None
    cost: float
    cls: str
    lp: LpSolution | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


def solve_optimal(inst: TransportInstance, cls: str = CH_STAR, method: str = "auto",
                  max_cells: int | None = None) -> TransportSolution:
    """Optimal plan over all plans (``ch``) or supermodular plans (``ch-star``).

    An empty ``ch-star`` class comes back with status ``"infeasible"``;
    unbounded or failed solves raise :class:`SolverError`.
    """
    lp = build_lp(inst, cls, max_cells)
    sol = lp_solve(lp, method)
    if sol.status == "infeasible":
        return TransportSolution("infeasible", None, float("nan"), cls, sol)
    if sol.status != "optimal":
        raise SolverError(f"transport LP ended with status {sol.status}: {sol.message}")
    n, m = inst.shape
    values = monotone_repair(sol.x, n * m)
    plan = capacity_from_values(inst.product_ground, values)
    tag = cls
    if cls == CH_STAR and not classify(plan, SUPERMODULAR_TOL).supermodular:
        raise SolverError("ch-star optimum lost supermodularity beyond tolerance")
    pi = TransportPlan(plan, (n, m), tag)
    return TransportSolution("optimal", pi, plan_cost(inst, pi), cls, sol)


def classical_ot_oracle(inst: TransportInstance) -> float:
    """Classical transportation LP over additive plans.

    Only defined for additive marginals; their singleton values are the
    row and column sums.
    """
    if not (classify(inst.mu).additive and classify(inst.nu).additive):
        raise ValueError("classical oracle needs additive marginals")
    n, m = inst.shape
    p = inst.mu.values[1 << np.arange(n)]
    q = inst.nu.values[1 << np.arange(m)]
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    res = _scipy_linprog(inst.cost.reshape(-1), A_eq=A[:-1], b_eq=np.concatenate([p, q])[:-1],
                         bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"classical transportation LP failed: {res.message}")
    return float(res.fun)


def product_measure_plan(mu: Capacity, nu: Capacity) -> TransportPlan:
    """Product of two additive marginals (a classical feasible plan)."""
    p = mu.values[1 << np.arange(mu.n)]
    q = nu.values[1 << np.arange(nu.n)]
    plan = additive_from_weights(np.outer(p, q).reshape(-1) / np.outer(p, q).sum(),
                                 GroundSet.product(mu.ground, nu.ground))
    return TransportPlan(plan, (mu.n, nu.n), CH_STAR)
