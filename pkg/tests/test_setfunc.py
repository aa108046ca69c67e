import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capacity_ot import (
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
from capacity_ot.errors import (
    CapacityError,
    DistortionError,
    GroundMismatchError,
    NullConditioningError,
    SizeGuardError,
)
from capacity_ot.setfunc import dirac, popcounts, preimage_masks

from oracles import brute_supermodular, random_capacity, random_supermodular

SQ = [0, 0.25, 0.25, 1]


def cap(values):
    n = int(np.log2(len(values)))
    return capacity_from_values(GroundSet.of_size(n), values)


class TestGroundSet:
    def test_product_is_row_major(self):
        X, Y = GroundSet(("a", "b")), GroundSet((0, 1, 2))
        P = GroundSet.product(X, Y)
        assert P.labels[4] == ("b", 1)
        assert P.n == 6

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            GroundSet(("a", "a"))

    def test_guard(self):
        with pytest.raises(SizeGuardError):
            GroundSet.of_size(21)

    def test_mask_members(self):
        G = GroundSet.of_size(4)
        assert G.mask([0, 3]) == 9
        assert G.members(9) == [0, 3]
        with pytest.raises(IndexError):
            G.mask([4])

    def test_popcounts(self):
        assert popcounts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


class TestCapacityFromValues:
    def test_smallest(self):
        assert cap([0, 1]).values.tolist() == [0, 1]

    def test_square_of_uniform(self):
        assert cap(SQ).values.tolist() == SQ

    def test_monotone_accepted_and_rejected(self):
        cap([0, 0.6, 0.2, 1])
        with pytest.raises(CapacityError) as err:
            cap([0, 0.6, 0.2, 0.5])
        assert "normaliz" in str(err.value) or err.value.masks

    def test_cover_pair_named(self):
        with pytest.raises(CapacityError) as err:
            cap([0, 0.6, 0.2, 0.55, 0.3, 0.7, 0.8, 1])
        assert err.value.masks
        S, T = err.value.masks[:2]
        assert S & T == S and bin(T ^ S).count("1") == 1

    @pytest.mark.parametrize("values", [[0.1, 1], [0, 0.9], [0, float("nan")], [0, 0.5, 0.5]])
    def test_bad_inputs(self, values):
        with pytest.raises(CapacityError):
            capacity_from_values(GroundSet.of_size(1), values)

    def test_values_read_only(self):
        mu = cap(SQ)
        with pytest.raises(ValueError):
            mu.values[1] = 0.3


class TestConstructors:
    @pytest.mark.parametrize("w,expected", [((0.5, 0.5), [0, 0.5, 0.5, 1]), ((1.0,), [0, 1]),
                                            ((0.2, 0.8), [0, 0.2, 0.8, 1])])
    def test_additive(self, w, expected):
        assert np.allclose(additive_from_weights(w).values, expected, atol=1e-15)

    @pytest.mark.parametrize("w,alpha,expected", [((0.5, 0.5), 2, [0, 0.25, 0.25, 1]),
                                                  ((0.2, 0.8), 2, [0, 0.04, 0.64, 1]),
                                                  ((1.0,), 7, [0, 1])])
    def test_power_distortion(self, w, alpha, expected):
        assert np.allclose(distorted(DistortionSpec(w, alpha=alpha)).values, expected, atol=1e-15)

    def test_piecewise_distortion(self):
        spec = DistortionSpec((0.5, 0.5), knots=((0, 0), (0.5, 0.2), (1, 1)))
        assert np.allclose(distorted(spec).values, [0, 0.2, 0.2, 1])

    @pytest.mark.parametrize("kwargs", [dict(alpha=0.5), dict(), dict(alpha=2, knots=((0, 0), (1, 1))),
                                        dict(knots=((0, 0), (0.5, 0.8), (1, 1))),
                                        dict(knots=((0, 0), (0.5, 0.2)))])
    def test_bad_distortion(self, kwargs):
        with pytest.raises(DistortionError):
            DistortionSpec((0.5, 0.5), **kwargs)

    @pytest.mark.parametrize("w", [(0.5, 0.4), (-0.1, 1.1)])
    def test_bad_weights(self, w):
        with pytest.raises(ValueError):
            additive_from_weights(w)

    def test_dirac(self):
        assert dirac(2, 1).values.tolist() == [0, 0, 1, 1]


class TestClassify:
    def test_examples(self):
        c = classify(cap(SQ))
        assert c.supermodular and not c.submodular and not c.additive
        assert classify(cap([0, 0.5, 0.5, 1])).additive
        c = classify(cap([0, 0.7, 0.7, 1]))
        assert not c.supermodular and c.submodular
        assert c.super_witness == (0, 0, 1)

    def test_matches_pairwise_definition(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 5))
            mu = random_capacity(rng, n) if rng.random() < 0.5 else random_supermodular(rng, n)
            assert classify(mu).supermodular == brute_supermodular(mu.values, n)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5), st.floats(1, 4), st.integers(0, 2**32 - 1))
    def test_convex_distortion_supermodular(self, n, alpha, seed):
        w = np.random.default_rng(seed).dirichlet(np.ones(n))
        assert classify(distorted(DistortionSpec(tuple(w), alpha=alpha)), 1e-12).supermodular


class TestPushForward:
    def test_identity(self, rng):
        mu = random_capacity(rng, 3)
        assert push_forward(mu, [0, 1, 2]).same_values(mu)

    def test_swap(self):
        assert np.allclose(push_forward(cap([0, 0.04, 0.64, 1]), [1, 0]).values, [0, 0.64, 0.04, 1])

    def test_constant(self):
        assert push_forward(cap(SQ), [0, 0]).values.tolist() == [0, 1]

    def test_label_map(self):
        X = GroundSet(("a", "b"))
        Y = GroundSet(("u", "v", "w"))
        mu = capacity_from_values(X, SQ)
        nu = push_forward(mu, {"a": "w", "b": "u"}, Y)
        assert nu(Y.mask([2])) == 0.25 and nu(Y.mask([1])) == 0.0

    def test_partial_map_rejected(self):
        with pytest.raises(ValueError):
            push_forward(cap(SQ), [0, 3], GroundSet.of_size(2))

    def test_preimages(self):
        assert preimage_masks(np.array([1, 0, 1]), 2).tolist() == [0, 2, 5, 7]


class TestProduct:
    def test_singleton_value(self):
        mu = cap(SQ)
        assert product(mu, mu)(1) == pytest.approx(0.0625, abs=1e-15)

    def test_rectangles_and_calibration(self, rng):
        for _ in range(20):
            n, m = rng.integers(1, 4, size=2)
            mu, nu = random_capacity(rng, n), random_capacity(rng, m)
            P = product(mu, nu)
            assert P(P.ground.full) == 1.0
            for A in range(1 << n):
                for B in range(1 << m):
                    W = sum(1 << (i * m + j) for i in range(n) if A >> i & 1 for j in range(m) if B >> j & 1)
                    assert P(W) == pytest.approx(mu(A) * nu(B), abs=1e-12)

    def test_guard(self):
        with pytest.raises(SizeGuardError):
            product(additive_from_weights(np.full(5, 0.2)), additive_from_weights(np.full(5, 0.2)))


class TestConditional:
    def test_examples(self):
        mu_a = conditional(cap(SQ), 1)
        assert mu_a.values.tolist() == [0, 1, 0, 1]
        assert conditional(cap(SQ), 3).same_values(cap(SQ))
        assert conditional(cap([0, 0.5, 0.5, 1]), 2).same_values(dirac(2, 1))

    def test_null(self):
        with pytest.raises(NullConditioningError):
            conditional(cap([0, 0, 0.5, 1]), 1)


class TestDistance:
    def test_examples(self, rng):
        a, b = cap(SQ), cap([0, 0.5, 0.5, 1])
        assert capacity_distance(a, a) == 0
        assert capacity_distance(a, b) == pytest.approx(0.1875, abs=1e-15)
        for _ in range(20):
            x, y = random_capacity(rng, 4), random_capacity(rng, 4)
            assert capacity_distance(x, y) == capacity_distance(y, x)

    def test_ground_mismatch(self):
        with pytest.raises(GroundMismatchError):
            capacity_distance(cap(SQ), cap([0, 1]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4))
def test_push_forward_keeps_supermodularity(seed, n, m):
    # preimages commute with unions and intersections
    rng = np.random.default_rng(seed)
    mu = random_supermodular(rng, n)
    T = rng.integers(0, m, size=n)
    assert classify(push_forward(mu, T, GroundSet.of_size(m)), 1e-12).supermodular
