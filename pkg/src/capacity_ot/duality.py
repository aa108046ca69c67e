"""Dual potentials for capacity transport.

The dual objective ``(C)int phi dmu + (C)int psi dnu`` is linear on each
cone of potentials sharing a fixed ordering of X and of Y, so its maximum
over feasible pairs is the best of one small LP per pair of orderings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .choquet import choquet_integral
from .cyclic import exchange_graph, is_c_cyclically_monotone
from .errors import SizeGuardError, SolverError
from .linprog import GE, LE, LinearProgram, lp_solve
from .setfunc import Capacity
from .transport import CH_STAR, TransportInstance, solve_optimal

MAX_SIDE = 5


@dataclass(frozen=True, eq=False)
class PotentialPair:
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float).reshape(-1)
        psi = np.array(self.psi, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
            raise ValueError("potentials must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    def shifted(self, t: float) -> "PotentialPair":
        return PotentialPair(self.phi + t, self.psi - t)


@dataclass
class FeasibilityReport:
    feasible: bool
    worst_violation: float  # max of phi(x) + psi(y) - c(x, y)
    worst_pair: tuple

    def __bool__(self):
        return self.feasible


def _check_dims(p: PotentialPair, cost):
    c = np.asarray(cost, dtype=float)
    if c.shape != (len(p.phi), len(p.psi)):
        raise ValueError(f"potentials of sizes ({len(p.phi)}, {len(p.psi)}) do not match cost {c.shape}")
    return c


def is_dual_feasible(p: PotentialPair, cost, tol: float = 1e-9) -> FeasibilityReport:
    c = _check_dims(p, cost)
    excess = p.phi[:, None] + p.psi[None, :] - c
    k = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[k])
    return FeasibilityReport(worst <= tol, worst, (int(k[0]), int(k[1])))


def dual_objective(p: PotentialPair, mu: Capacity, nu: Capacity) -> float:
    return choquet_integral(p.phi, mu) + choquet_integral(p.psi, nu)


def c_transform_x(psi, cost) -> np.ndarray:
    """``phi(x) = min_y c(x, y) - psi(y)``."""
    return np.min(np.asarray(cost) - np.asarray(psi)[None, :], axis=1)


def c_transform_y(phi, cost) -> np.ndarray:
    """``psi(y) = min_x c(x, y) - phi(x)``."""
    return np.min(np.asarray(cost) - np.asarray(phi)[:, None], axis=0)


@dataclass
class DualReport:
    primal_value: float | None  # None when the ch-star class is empty
    dual_value: float
    gap: float | None
    pair: PotentialPair
    orderings_searched: int
    primal_status: str = "optimal"


def _chain_increments(cap: Capacity, order) -> np.ndarray:
    """Capacity increments along the chain built by adding ``order`` one by one."""
    chain = np.cumsum(np.left_shift(1, np.asarray(order)))
    return np.diff(cap.values[chain], prepend=0.0)


def _cone_program(cost: np.ndarray, w_phi: np.ndarray, w_psi: np.ndarray, sx, sy) -> LinearProgram:
    n, m = cost.shape
    lp = LinearProgram(n + m, "max")
    lp.set_bounds(slice(None), -np.inf, np.inf)
    lp.set_bounds(0, 0.0, 0.0)  # gauge
    lp.c[list(sx)] = w_phi
    lp.c[[n + j for j in sy]] = w_psi
    i, j = np.divmod(np.arange(n * m), m)
    r = np.arange(n * m)
    lp.add_rows(np.concatenate([r, r]), np.concatenate([i, n + j]), np.ones(2 * n * m), LE, cost.reshape(-1))
    for order, base in ((sx, 0), (sy, n)):
        k = len(order) - 1
        if k:
            r = np.arange(k)
            lp.add_rows(np.concatenate([r, r]),
                        np.concatenate([base + np.asarray(order[:-1]), base + np.asarray(order[1:])]),
                        np.concatenate([np.ones(k), -np.ones(k)]), GE, np.zeros(k))
    return lp


def solve_dual(inst: TransportInstance, method: str = "auto", primal: float | None = None) -> DualReport:
    """Maximize the dual objective by enumerating ordering cones.

    Within the cone where ``phi`` decreases along ``sx`` and ``psi`` along
    ``sy`` each Choquet integral is a fixed linear form.  Cones are visited
    in lexicographic order and a later cone replaces the incumbent only if
    it is better by more than 1e-12.  ``primal`` defaults to the ch-star
    optimum.
    """
    n, m = inst.shape
    if n > MAX_SIDE or m > MAX_SIDE:
        raise SizeGuardError(f"cone enumeration needs {math.factorial(n) * math.factorial(m)} LPs; "
                             f"sides are limited to {MAX_SIDE}")
    cost = np.asarray(inst.cost)
    best_val, best_x, searched = -np.inf, None, 0
    wy_cache = {sy: _chain_increments(inst.nu, sy) for sy in itertools.permutations(range(m))}
    for sx in itertools.permutations(range(n)):
        w_phi = _chain_increments(inst.mu, sx)
        for sy, w_psi in wy_cache.items():
            searched += 1
            sol = lp_solve(_cone_program(cost, w_phi, w_psi, sx, sy), method)
            if sol.status == "infeasible":
                continue
            if sol.status != "optimal":
                raise SolverError(f"cone LP {sx}, {sy} ended with status {sol.status}")
            if sol.objective > best_val + 1e-12:
                best_val, best_x = sol.objective, sol.x
    pair = PotentialPair(best_x[:n], best_x[n:])
    value = dual_objective(pair, inst.mu, inst.nu)

    status = "optimal"
    if primal is None:
        res = solve_optimal(inst, CH_STAR)
        status = res.status
        primal = res.cost if res.feasible else None
    gap = None if primal is None else primal - value
    return DualReport(primal, value, gap, pair, searched, status)


def potentials_from_monotone_set(S, cost) -> PotentialPair:
    """Potentials tight on a c-cyclically monotone set.

    Shortest exchange-path distances ``d`` from the first point of ``S``
    give ``phi(x) = min_k d_k + c(x, y_k) - c(x_k, y_k)``; then ``psi`` is
    the c-transform of ``phi`` and ``phi`` is replaced by the c-transform of
    ``psi``.  The pair is tight on ``S`` and each potential is the
    c-transform of the other.
    """
    points = tuple(S)
    if not points:
        raise ValueError("potentials need a nonempty set")
    c = np.asarray(cost, dtype=float)
    report = is_c_cyclically_monotone(points, c, tol=1e-9)
    if not report:
        raise ValueError(f"set is not c-cyclically monotone; cycle weight {report.cycle_weight:.3g}")
    k = len(points)
    w = exchange_graph(points, c)
    d = np.full(k, np.inf)
    d[0] = 0.0
    for _ in range(k - 1):
        d = np.minimum(d, np.min(d[:, None] + w, axis=0))
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    phi = np.min(d[None, :] + c[:, ys] - c[xs, ys][None, :], axis=1)
    psi = c_transform_y(phi, c)
    phi = c_transform_x(psi, c)
    return PotentialPair(phi, psi)


@dataclass
class CMReport:
    cm1: float  # max |phi - c-transform of psi|
    cm2: float  # max |psi - c-transform of phi|
    cm3: float  # max |phi + psi - c| over S
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.cm1, self.cm2, self.cm3) <= self.tol

    def __bool__(self):
        return self.ok


def check_cm(p: PotentialPair, S, cost, tol: float = 1e-9) -> CMReport:
    c = _check_dims(p, cost)
    cm1 = float(np.max(np.abs(p.phi - c_transform_x(p.psi, c))))
    cm2 = float(np.max(np.abs(p.psi - c_transform_y(p.phi, c))))
    pts = tuple(S)
    cm3 = max((abs(p.phi[x] + p.psi[y] - c[x, y]) for x, y in pts), default=0.0)
    return CMReport(cm1, cm2, float(cm3), tol)
