"""Choquet integrals against a non-additive capacity.

Squaring the uniform probability on two points gives a capacity that
undervalues both singletons.  The integral is then no longer additive,
except on pairs of functions that are ordered the same way.
"""

import numpy as np

from capacity_ot import (
    DistortionSpec,
    are_comonotone,
    choquet_integral,
    choquet_quadrature,
    classify,
    distorted,
)

mu = distorted(DistortionSpec((0.5, 0.5), alpha=2))
print("capacity values by mask:", mu.values.tolist())
c = classify(mu)
print(f"supermodular={c.supermodular} submodular={c.submodular}")

f = np.array([2.0, 1.0])
print("\nsorted form       ", choquet_integral(f, mu))
print("level sets {f>=t} ", choquet_quadrature(f, mu))
print("level sets {f>t}  ", choquet_quadrature(f, mu, strict=True))
print("signed integrand (1, -1):", choquet_integral([1, -1], mu))

# additivity fails for the two indicators, which are not comonotone
a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
print("\nI(a) + I(b) =", choquet_integral(a, mu) + choquet_integral(b, mu))
print("I(a + b)    =", choquet_integral(a + b, mu), " comonotone:", are_comonotone(a, b))

# and holds for a comonotone pair
g = np.array([5.0, 3.0])
print("I(f) + I(g) =", choquet_integral(f, mu) + choquet_integral(g, mu))
print("I(f + g)    =", choquet_integral(f + g, mu), " comonotone:", are_comonotone(f, g))
