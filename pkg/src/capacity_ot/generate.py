"""Seeded instance generation and the run configuration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeGuardError
from .setfunc import DistortionSpec, GroundSet, additive_from_weights, distorted
from .transport import CH, CH_STAR, CLASSES, GUARDS, STORAGE_GUARD, TransportInstance

KINDS = ("additive", "distorted-alpha", "random-supermodular")


@dataclass(frozen=True)
class RunConfig:
    cls: str = CH_STAR
    feasibility: float = 1e-9
    tau: float = 1e-9
    gap_flag: float = 1e-6
    max_cells: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown plan class {self.cls!r}")
        for name in ("feasibility", "tau", "gap_flag"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def random_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.dirichlet(np.ones(n))
    w[-1] = 1.0 - w[:-1].sum()
    if w[-1] < 0:
        w[-1] = 0.0
        w /= w.sum()
    return w


def random_convex_knots(rng: np.random.Generator, max_knots: int = 5) -> tuple:
    """Piecewise-linear convex distortion through (0, 0) and (1, 1)."""
    pieces = int(rng.integers(1, max_knots))  # at most max_knots knots
    inner = np.sort(rng.choice(np.arange(1, 1000), size=pieces - 1, replace=False)) / 1000.0
    t = np.concatenate([[0.0], inner, [1.0]])
    slopes = np.sort(rng.uniform(0.0, 1.0, size=pieces))
    u = np.concatenate([[0.0], np.cumsum(slopes * np.diff(t))])
    u = u / u[-1]
    u[-1] = 1.0
    return tuple((float(a), float(b)) for a, b in zip(t, u))


def generate_instance(cfg: RunConfig, n: int, m: int, kind: str) -> TransportInstance:
    """Deterministic in ``cfg.seed``.

    Both marginals share one distortion (the same ``alpha`` or the same
    knots), which keeps the supermodular plan class nonempty: distorting the
    product of the two weight vectors gives a feasible plan.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {KINDS}")
    guard = cfg.max_cells or GUARDS[cfg.cls]
    if n < 1 or m < 1 or n * m > guard:
        raise SizeGuardError(f"{n}x{m} instance exceeds the {cfg.cls} guard of {guard} cells")
    rng = np.random.default_rng(cfg.seed)
    X = GroundSet.of_size(n, "x")
    Y = GroundSet.of_size(m, "y")
    p, q = random_weights(rng, n), random_weights(rng, m)
    if kind == "additive":
        mu, nu = additive_from_weights(p, X), additive_from_weights(q, Y)
    elif kind == "distorted-alpha":
        alpha = float(rng.uniform(1.0, 3.0))
        mu = distorted(DistortionSpec(tuple(p), alpha=alpha), X)
        nu = distorted(DistortionSpec(tuple(q), alpha=alpha), Y)
    else:
        knots = random_convex_knots(rng)
        mu = distorted(DistortionSpec(tuple(p), knots=knots), X)
        nu = distorted(DistortionSpec(tuple(q), knots=knots), Y)
    cost = np.round(rng.uniform(0.0, 10.0, size=(n, m)), 3)
    return TransportInstance(X, Y, cost, mu, nu, max(STORAGE_GUARD, n * m))


CORPUS_SHAPES = ((1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3))


def default_corpus(seed: int = 0, repeats: int = 2) -> list[tuple[str, TransportInstance]]:
    """Every corpus shape crossed with every kind, ``repeats`` times."""
    out = []
    k = 0
    for rep in range(repeats):
        for n, m in CORPUS_SHAPES:
            for kind in KINDS:
                child = int(np.random.SeedSequence([seed, k]).generate_state(1, dtype=np.uint64)[0])
                inst = generate_instance(RunConfig(seed=child), n, m, kind)
                out.append((f"{kind}-{n}x{m}-{rep}", inst))
                k += 1
    return out
