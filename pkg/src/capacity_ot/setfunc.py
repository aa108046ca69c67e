"""Capacities on finite ground sets, stored densely on the subset lattice.

A subset of an ``n``-element ground set is an integer bitmask: bit ``i`` set
means element ``i`` belongs to the subset.  A :class:`Capacity` keeps one real
per mask, so ``values[0]`` is the empty set and ``values[2**n - 1]`` the full
set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CapacityError,
    DistortionError,
    GroundMismatchError,
    NullConditioningError,
    SizeGuardError,
)

MAX_GROUND = 20
TOL = 1e-12


@dataclass(frozen=True)
class GroundSet:
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("ground set must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in ground set: {labels}")
        if len(labels) > MAX_GROUND:
            raise SizeGuardError(f"ground set of size {len(labels)} exceeds the guard {MAX_GROUND}")

    @classmethod
    def of_size(cls, n, prefix="e"):
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @classmethod
    def product(cls, X: "GroundSet", Y: "GroundSet") -> "GroundSet":
        """Row-major product: element ``(i, j)`` gets index ``i * m + j``."""
        return cls(tuple((x, y) for x in X.labels for y in Y.labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def index(self, label) -> int:
        return self.labels.index(label)

    def mask(self, members) -> int:
        """Mask of an iterable of element indices."""
        out = 0
        for i in members:
            if not 0 <= i < self.n:
                raise IndexError(f"element index {i} outside ground set of size {self.n}")
            out |= 1 << i
        return out

    def members(self, mask: int) -> list[int]:
        return [i for i in range(self.n) if mask >> i & 1]


def popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts += (masks >> i) & 1
    return counts


def _as_ground(ground) -> GroundSet:
    if isinstance(ground, GroundSet):
        return ground
    if isinstance(ground, (int, np.integer)):
        return GroundSet.of_size(int(ground))
    return GroundSet(tuple(ground))


@dataclass(frozen=True, eq=False)
class Capacity:
    """Normalized monotone set function on ``ground``.

    Build through :func:`capacity_from_values` (or the other constructors);
    the constructor itself does not validate.
    """

    ground: GroundSet
    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.ground.n

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        if self.n <= 3:
            return f"Capacity(n={self.n}, values={np.round(self.values, 6).tolist()})"
        return f"Capacity(n={self.n})"

    def same_values(self, other: "Capacity", tol: float = 0.0) -> bool:
        return self.ground == other.ground and bool(np.all(np.abs(self.values - other.values) <= tol))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def check_capacity_values(values: np.ndarray, n: int, tol: float = TOL) -> None:
    """Raise :class:`CapacityError` unless ``values`` is a capacity on ``n`` points."""
    size = 1 << n
    if values.shape != (size,):
        raise CapacityError(f"expected {size} values for a ground set of size {n}, got {values.shape[0] if values.ndim == 1 else values.shape}")
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise CapacityError(f"non-finite value at mask {bad}", (bad,))
    if abs(values[0]) > tol:
        raise CapacityError(f"value of the empty set is {values[0]!r}, expected 0", (0,))
    if abs(values[size - 1] - 1.0) > tol:
        raise CapacityError(f"value of the full set is {values[size - 1]!r}, expected 1", (size - 1,))
    masks = np.arange(size)
    for i in range(n):
        lower = masks[(masks >> i & 1) == 0]
        upper = lower | (1 << i)
        drop = values[lower] - values[upper]
        if np.any(drop > tol):
            k = int(np.argmax(drop))
            s, t = int(lower[k]), int(upper[k])
            raise CapacityError(
                f"monotonicity fails on cover pair ({s}, {t}): "
                f"values[{s}]={values[s]!r} > values[{t}]={values[t]!r}",
                (s, t),
            )
    if np.any(values < -tol) or np.any(values > 1 + tol):
        bad = int(np.flatnonzero((values < -tol) | (values > 1 + tol))[0])
        raise CapacityError(f"value at mask {bad} outside [0, 1]", (bad,))


def capacity_from_values(ground, values, tol: float = TOL) -> Capacity:
    """Validate ``values`` (indexed by mask) and wrap them as a capacity.

    Values within ``tol`` of a constraint are accepted and then clamped to
    [0, 1] with exact 0 and 1 at the empty and full sets.
    """
    ground = _as_ground(ground)
    arr = np.array(values, dtype=float).reshape(-1)
    check_capacity_values(arr, ground.n, tol)
    arr = np.clip(arr, 0.0, 1.0)
    arr[0] = 0.0
    arr[-1] = 1.0
    return Capacity(ground, _frozen(arr))


def _subset_sums(weights: np.ndarray) -> np.ndarray:
    n = len(weights)
    sums = np.zeros(1 << n)
    for i in range(n):
        sums[1 << i: 1 << (i + 1)] = sums[: 1 << i] + weights[i]
    return sums


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size == 0:
        raise ValueError("weights must be nonempty")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"weights must be finite and nonnegative, got {w.tolist()}")
    if abs(w.sum() - 1.0) > TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
    return w


def additive_from_weights(weights, ground=None) -> Capacity:
    w = _check_weights(weights)
    ground = GroundSet.of_size(len(w)) if ground is None else _as_ground(ground)
    if ground.n != len(w):
        raise GroundMismatchError(f"{len(w)} weights for a ground set of size {ground.n}")
    sums = _subset_sums(w)
    sums[-1] = 1.0
    return capacity_from_values(ground, np.clip(sums, 0.0, 1.0))


@dataclass(frozen=True)
class DistortionSpec:
    """Probability weights plus a convex distortion ``u`` of [0, 1].

    Give exactly one of ``alpha`` (``u(t) = t**alpha``, ``alpha >= 1``) or
    ``knots`` (abscissa/ordinate pairs of a piecewise-linear ``u`` running
    from (0, 0) to (1, 1) with nondecreasing slopes).
    """

    weights: tuple
    alpha: float | None = None
    knots: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.knots is not None:
            object.__setattr__(self, "knots", tuple((float(a), float(b)) for a, b in self.knots))
        self.validate()

    def validate(self):
        try:
            _check_weights(self.weights)
        except ValueError as exc:
            raise DistortionError(str(exc)) from None
        if (self.alpha is None) == (self.knots is None):
            raise DistortionError("give exactly one of alpha or knots")
        if self.alpha is not None:
            if not np.isfinite(self.alpha) or self.alpha < 1:
                raise DistortionError(f"power distortion needs alpha >= 1, got {self.alpha}")
            return
        k = np.array(self.knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or len(k) < 2:
            raise DistortionError("knots must be a list of at least two (t, u) pairs")
        if k[0, 0] != 0 or k[0, 1] != 0 or k[-1, 0] != 1 or k[-1, 1] != 1:
            raise DistortionError("knots must start at (0, 0) and end at (1, 1)")
        dt = np.diff(k[:, 0])
        if np.any(dt <= 0):
            raise DistortionError("knot abscissae must be strictly increasing")
        slopes = np.diff(k[:, 1]) / dt
        if np.any(slopes < -TOL):
            raise DistortionError("distortion must be nondecreasing")
        if np.any(np.diff(slopes) < -1e-9):
            raise DistortionError(f"distortion must be convex, slopes {slopes.tolist()}")

    def u(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        if self.alpha is not None:
            return t ** self.alpha
        k = np.array(self.knots)
        return np.interp(t, k[:, 0], k[:, 1])


def distorted(spec: DistortionSpec, ground=None) -> Capacity:
    spec.validate()
    w = np.asarray(spec.weights)
    ground = GroundSet.of_size(len(w)) if ground is None else _as_ground(ground)
    if ground.n != len(w):
        raise GroundMismatchError(f"{len(w)} weights for a ground set of size {ground.n}")
    sums = _subset_sums(w)
    sums[-1] = 1.0
    return capacity_from_values(ground, spec.u(sums))


@dataclass(frozen=True)
class Classification:
    supermodular: bool
    submodular: bool
    # (S, i, j) violating each property, or None
    super_witness: tuple | None = None
    sub_witness: tuple | None = None

    @property
    def additive(self) -> bool:
        return self.supermodular and self.submodular


def second_differences(values: np.ndarray, n: int):
    """Yield ``(i, j, S, d)`` with ``d = v[S+i+j] - v[S+j] - v[S+i] + v[S]``.

    ``S`` runs over all masks avoiding ``i`` and ``j``; one yield per pair.
    """
    masks = np.arange(1 << n)
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            S = masks[(masks & (bi | bj)) == 0]
            d = values[S | bi | bj] - values[S | bj] - values[S | bi] + values[S]
            yield i, j, S, d


def classify(mu: Capacity, tol: float = TOL) -> Classification:
    """Supermodularity/submodularity through the local lattice condition."""
    sup_w = sub_w = None
    for i, j, S, d in second_differences(mu.values, mu.n):
        if sup_w is None and np.any(d < -tol):
            k = int(np.argmax(d < -tol))
            sup_w = (int(S[k]), i, j)
        if sub_w is None and np.any(d > tol):
            k = int(np.argmax(d > tol))
            sub_w = (int(S[k]), i, j)
        if sup_w is not None and sub_w is not None:
            break
    return Classification(sup_w is None, sub_w is None, sup_w, sub_w)


def _map_indices(T, source: GroundSet, target: GroundSet) -> np.ndarray:
    if isinstance(T, dict):
        idx = [target.index(T[x]) if T[x] in target.labels else -1 for x in source.labels]
    else:
        idx = [int(t) for t in T]
    idx = np.asarray(idx, dtype=np.int64)
    if idx.shape != (source.n,):
        raise ValueError(f"map must be total on {source.n} elements, got {len(idx)} images")
    if np.any(idx < 0) or np.any(idx >= target.n):
        raise ValueError(f"map sends an element outside the target ground set of size {target.n}")
    return idx


def preimage_masks(T: np.ndarray, m: int) -> np.ndarray:
    """``out[B]`` is the mask of ``T^{-1}(B)`` for every ``B`` on ``m`` points."""
    B = np.arange(1 << m)
    out = np.zeros(1 << m, dtype=np.int64)
    for i, t in enumerate(T):
        out |= ((B >> int(t)) & 1) << i
    return out


def push_forward(mu: Capacity, T, Y=None) -> Capacity:
    """``(T#mu)(B) = mu(T^{-1}(B))``.

    ``T`` is a sequence of target indices (or a label-to-label dict); ``Y``
    defaults to a ground set just large enough for the images.
    """
    if Y is None:
        if isinstance(T, dict):
            raise ValueError("target ground set required for a label map")
        Y = GroundSet.of_size(max(int(t) for t in T) + 1)
    Y = _as_ground(Y)
    idx = _map_indices(T, mu.ground, Y)
    return capacity_from_values(Y, mu.values[preimage_masks(idx, Y.n)])


def section_masks(n: int, m: int) -> np.ndarray:
    """``out[W, x]`` is the mask of ``{y : (x, y) in W}`` on the row-major product."""
    W = np.arange(1 << (n * m))
    row = (1 << m) - 1
    return np.stack([(W >> (x * m)) & row for x in range(n)], axis=1)


def product(mu: Capacity, nu: Capacity) -> Capacity:
    """Iterated Choquet product on the row-major product ground set.

    ``(mu x nu)(W)`` integrates the section function ``x -> nu(W_x)`` against
    ``mu``.  Rectangles give ``mu(A) * nu(B)``.  For non-additive inputs the
    result depends on the order: the X-integral is outermost.
    """
    from .choquet import choquet_rows

    n, m = mu.n, nu.n
    if n * m > MAX_GROUND:
        raise SizeGuardError(f"product ground set of size {n * m} exceeds the guard {MAX_GROUND}")
    sections = nu.values[section_masks(n, m)]
    values = choquet_rows(sections, mu.values)
    return capacity_from_values(GroundSet.product(mu.ground, nu.ground), values)


def conditional(mu: Capacity, A: int) -> Capacity:
    """``mu_A(B) = mu(B & A) / mu(A)``."""
    if A == 0 or mu.values[A] <= 0:
        raise NullConditioningError(f"cannot condition on mask {A} with capacity {mu.values[A] if A else 0.0}")
    masks = np.arange(1 << mu.n)
    return capacity_from_values(mu.ground, mu.values[masks & A] / mu.values[A])


def capacity_distance(mu: Capacity, nu: Capacity) -> float:
    """Weighted sum of ``2**-j |mu(S_j) - nu(S_j)|`` over nonempty masks ``j``.

    Indicators of the subsets stand in for a dense family of unit-norm test
    functions; their Choquet integrals are the capacity values.  For ground
    sets larger than about 10 points the weights of high masks underflow.
    """
    if mu.ground != nu.ground:
        raise GroundMismatchError("capacities live on different ground sets")
    j = np.arange(1, 1 << mu.n)
    return float(np.sum(np.ldexp(1.0, -j) * np.abs(mu.values[1:] - nu.values[1:])))


def dirac(ground, i: int) -> Capacity:
    ground = _as_ground(ground)
    masks = np.arange(1 << ground.n)
    return capacity_from_values(ground, ((masks >> i) & 1).astype(float))
