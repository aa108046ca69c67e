"""Choquet integration against capacities on finite ground sets."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GroundMismatchError, NonRepresentableError, CapacityError
from .setfunc import Capacity, GroundSet, capacity_from_values, conditional


class NullSetWarning(UserWarning):
    """Integration over a set of zero capacity; the result is 0 by convention."""


@dataclass(frozen=True, eq=False)
class RandomVariable:
    ground: GroundSet
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape != (self.ground.n,):
            raise GroundMismatchError(f"{v.size} values for a ground set of size {self.ground.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("random variable values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _integrand(f, mu: Capacity) -> np.ndarray:
    if isinstance(f, RandomVariable):
        if f.ground != mu.ground:
            raise GroundMismatchError("integrand and capacity live on different ground sets")
        return f.values
    v = np.asarray(f, dtype=float).reshape(-1)
    if v.shape != (mu.n,):
        raise GroundMismatchError(f"integrand has {v.size} values, capacity has {mu.n} points")
    if not np.all(np.isfinite(v)):
        raise ValueError("integrand contains NaN or infinite values")
    return v


def choquet_rows(F: np.ndarray, capacity_values: np.ndarray) -> np.ndarray:
    """Choquet integral of every row of ``F`` against one capacity.

    Sorted form: order the points by decreasing value (ties by index) and
    weight each value by the capacity increment of the growing top set.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    order = np.argsort(-F, axis=1, kind="stable")
    bits = np.left_shift(1, order)
    chain = np.cumsum(bits, axis=1)
    mu_chain = capacity_values[chain]
    increments = np.diff(mu_chain, axis=1, prepend=0.0)
    return np.sum(np.take_along_axis(F, order, axis=1) * increments, axis=1)


def choquet_integral(f, mu: Capacity) -> float:
    return float(choquet_rows(_integrand(f, mu)[None, :], mu.values)[0])


def sorted_weights(f, mu: Capacity) -> np.ndarray:
    """Point weights ``w`` with ``choquet_integral(g, mu) == w @ g`` for every
    ``g`` ordered like ``f``."""
    v = _integrand(f, mu)
    order = np.argsort(-v, kind="stable")
    chain = np.cumsum(np.left_shift(1, order))
    inc = np.diff(mu.values[chain], prepend=0.0)
    w = np.empty(mu.n)
    w[order] = inc
    return w


def choquet_quadrature(f, mu: Capacity, strict: bool = False) -> float:
    """Integrate the survival function ``t -> mu({f >= t})`` piece by piece.

    Positive and negative half-lines are handled separately, the latter as
    ``mu(...) - 1``.  With ``strict`` the level sets are ``{f > t}``.  The
    survival function is a step function with jumps at the values of ``f``,
    so splitting at those values and at 0 makes the integration exact.
    """
    v = _integrand(f, mu)
    breaks = np.unique(np.concatenate([v, [0.0]]))
    weight = 1 << np.arange(mu.n)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        # level set is constant on (a, b]; for the strict form on [a, b)
        level = int(np.sum(weight[v > a])) if strict else int(np.sum(weight[v >= b]))
        height = mu.values[level]
        if a >= 0:
            total += (b - a) * height
        else:
            total += (b - a) * (height - 1.0)
    return float(total)


def choquet_integral_over(f, mu: Capacity, A: int) -> float:
    """``mu(A)`` times the integral against the conditional capacity ``mu_A``.

    Returns 0 with a :class:`NullSetWarning` when ``mu(A) == 0``.
    """
    v = _integrand(f, mu)
    if A == 0 or mu.values[A] <= 0:
        warnings.warn(f"mask {A} has zero capacity; integral taken as 0", NullSetWarning, stacklevel=2)
        return 0.0
    return float(mu.values[A] * choquet_integral(v, conditional(mu, A)))


def are_comonotone(f, g) -> bool:
    fv = np.asarray(f.values if isinstance(f, RandomVariable) else f, dtype=float)
    gv = np.asarray(g.values if isinstance(g, RandomVariable) else g, dtype=float)
    if isinstance(f, RandomVariable) and isinstance(g, RandomVariable) and f.ground != g.ground:
        raise GroundMismatchError("random variables live on different ground sets")
    if fv.shape != gv.shape:
        raise GroundMismatchError(f"shapes differ: {fv.shape} vs {gv.shape}")
    df = fv[:, None] - fv[None, :]
    dg = gv[:, None] - gv[None, :]
    return bool(np.all(df * dg >= 0))


def capacity_from_functional(I: Callable[[np.ndarray], float], ground) -> Capacity:
    """Recover the capacity represented by a Choquet-type functional.

    ``I`` is evaluated on the indicator of every subset.  Raises
    :class:`NonRepresentableError` if those values do not form a capacity.
    """
    if not isinstance(ground, GroundSet):
        ground = GroundSet.of_size(ground) if isinstance(ground, int) else GroundSet(ground)
    n = ground.n
    values = np.empty(1 << n)
    for S in range(1 << n):
        chi = np.array([(S >> i) & 1 for i in range(n)], dtype=float)
        values[S] = I(chi)
    try:
        return capacity_from_values(ground, values)
    except CapacityError as exc:
        raise NonRepresentableError(f"functional is not a Choquet integral: {exc}", exc.masks) from None
