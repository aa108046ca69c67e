"""Supports of plans, c-cyclical monotonicity, and the cycle-exchange step
that lowers the cost of a plan whose support is not cyclically monotone."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choquet import choquet_integral
from .errors import CapacityError
from .setfunc import check_capacity_values, capacity_from_values
from .transport import CH, TransportPlan

DEFAULT_TAU = 1e-9


@dataclass(frozen=True)
class SupportSet:
    points: tuple  # (x index, y index) pairs, in row-major order
    tau: float = DEFAULT_TAU

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class Cycle:
    """Support points with a permutation; ``sigma[k]`` is the position whose
    x-coordinate is moved onto ``points[k]``'s y-coordinate."""

    points: tuple
    sigma: tuple

    def __post_init__(self):
        if sorted(self.sigma) != list(range(len(self.points))):
            raise ValueError(f"sigma {self.sigma} is not a permutation of {len(self.points)} points")
        if len(set(self.points)) != len(self.points):
            raise ValueError("cycle points must be distinct")

    def weight(self, cost) -> float:
        """``sum c(x_sigma(k), y_k) - sum c(x_k, y_k)``; negative means a violation."""
        c = np.asarray(cost)
        return float(sum(c[self.points[self.sigma[k]][0], y] - c[x, y]
                         for k, (x, y) in enumerate(self.points)))


def support(pi: TransportPlan, tau: float = DEFAULT_TAU) -> SupportSet:
    """Points whose singleton carries plan value above ``tau``.

    Singletons are the smallest neighborhoods in a finite space.  Capacities
    that vanish on every singleton have an empty support.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    n, m = pi.shape
    single = pi.values[1 << np.arange(n * m)]
    pts = tuple((int(k) // m, int(k) % m) for k in np.flatnonzero(single > tau))
    return SupportSet(pts, tau)


@dataclass(frozen=True)
class CyclicityReport:
    monotone: bool
    cycle: Cycle | None = None
    cycle_weight: float = 0.0

    def __bool__(self):
        return self.monotone


def exchange_graph(points, cost) -> np.ndarray:
    """``w[a, b] = c(x_b, y_a) - c(x_a, y_a)``: cost change when point ``a``
    receives the x-coordinate of point ``b``."""
    c = np.asarray(cost, dtype=float)
    xs = np.array([p[0] for p in points], dtype=np.int64)
    ys = np.array([p[1] for p in points], dtype=np.int64)
    return c[xs[None, :], ys[:, None]] - c[xs, ys][:, None]


def is_c_cyclically_monotone(S, cost, tol: float = 1e-12) -> CyclicityReport:
    """Negative-cycle test on the exchange graph of ``S``.

    Bellman-Ford from a virtual source connected to every point at weight 0.
    A relaxation only counts if it improves a distance by more than ``tol``,
    so cycles of weight above roughly ``-tol`` are accepted as round-off.
    """
    points = tuple(S)
    k = len(points)
    if k <= 1:
        return CyclicityReport(True)
    w = exchange_graph(points, cost)
    dist = np.zeros(k)
    pred = np.full(k, -1, dtype=np.int64)
    last = -1
    for _ in range(k):
        last = -1
        for a in range(k):
            cand = dist[a] + w[a]
            better = np.flatnonzero(cand < dist - tol)
            for b in better:
                if cand[b] < dist[b] - tol:
                    dist[b] = cand[b]
                    pred[b] = a
                    last = b
        if last < 0:
            return CyclicityReport(True)

    v = last
    for _ in range(k):
        v = pred[v]
        if v < 0:
            raise RuntimeError("predecessor chain left the graph while extracting a negative cycle")
    order = [v]
    u = pred[v]
    while u != v:
        order.append(u)
        u = pred[u]
    order.reverse()  # order[t] -> order[t + 1] are graph edges
    cyc_pts = tuple(points[i] for i in order)
    sigma = tuple((t + 1) % len(order) for t in range(len(order)))
    cycle = Cycle(cyc_pts, sigma)
    return CyclicityReport(False, cycle, cycle.weight(cost))


def min_cycle_weight(S, cost) -> float:
    """Smallest total weight of a closed walk in the exchange graph.

    Equals the lightest simple cycle when no cycle is negative; ``inf`` for
    fewer than two points.
    """
    points = tuple(S)
    k = len(points)
    if k <= 1:
        return float("inf")
    d = exchange_graph(points, cost)
    np.fill_diagonal(d, np.inf)
    for v in range(k):
        d = np.minimum(d, d[:, v:v + 1] + d[v:v + 1, :])
    return float(np.min(np.diag(d)))


@dataclass
class ImprovementReport:
    alpha: float
    cost_before: float
    cost_after: float
    gamma: TransportPlan


def improve_plan(pi: TransportPlan, cycle: Cycle, cost) -> ImprovementReport:
    """Move mass ``alpha`` from each cycle point onto its exchanged partner.

    ``gamma = pi + alpha * sum_k (delta[x_sigma(k), y_k] - delta[x_k, y_k])``
    with ``alpha = min_k pi({p_k}) / len(cycle)``.  The x-coordinates are
    only permuted, so both marginals are unchanged.  Monotonicity of
    ``gamma`` is guaranteed for supermodular ``pi``; otherwise it is checked
    and a :class:`CapacityError` names the failing cover pair.  ``gamma`` need
    not be supermodular and is tagged ``ch``.
    """
    n, m = pi.shape
    c = np.asarray(cost, dtype=float)
    pts = cycle.points
    k = len(pts)
    idx = np.array([x * m + y for x, y in pts], dtype=np.int64)
    single = pi.values[1 << idx]
    if np.any(single <= 0):
        bad = pts[int(np.argmin(single))]
        raise ValueError(f"cycle point {bad} carries no plan mass")
    alpha = float(single.min()) / k
    masks = np.arange(1 << (n * m), dtype=np.int64)
    delta = np.zeros(len(masks))
    for t, (x, y) in enumerate(pts):
        gain = pts[cycle.sigma[t]][0] * m + y
        delta += (masks >> gain) & 1
        delta -= (masks >> idx[t]) & 1
    values = pi.values + alpha * delta
    try:
        check_capacity_values(values, n * m)
    except CapacityError as exc:
        raise CapacityError(f"exchanged set function is not a capacity: {exc}", exc.masks) from None
    gamma = TransportPlan(capacity_from_values(pi.plan.ground, values), (n, m), CH)
    flat = c.reshape(-1)
    before = choquet_integral(flat, pi.plan)
    after = choquet_integral(flat, gamma.plan)
    return ImprovementReport(alpha, before, after, gamma)
