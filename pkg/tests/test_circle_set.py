from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indicatrix.circle_set import (
    Arc,
    CircleOpenSet,
    InvalidInputError,
    as_fraction,
    critical_shifts,
    kh_deficit,
    kh_measure,
    measure,
    normalize,
    one_sided_incidence,
    tau,
    tau_bruteforce,
    tau_sup,
    tau_sup_with_argmax,
    translate,
)
from indicatrix.constructions import FatCantorSpec, fat_cantor_complement, random_open_set


def membership_grid(E, n=10_000):
    return np.array([F(k, n) + F(1, 2 * n) in E for k in range(n)])


def float_tau(E, hs):
    """tau from pairwise interval overlaps in floating point."""
    pieces = [(float(a), float(b)) for a, b in E.pieces]
    hs = np.asarray(hs, dtype=float)
    over = np.zeros_like(hs)
    for a, b in pieces:
        for c, d in pieces:
            for k in (-1, 0, 1):
                lo = np.maximum(a, c - hs + k)
                hi = np.minimum(b, d - hs + k)
                over += np.clip(hi - lo, 0, None)
    return 2 * (float(E.measure) - over)


random_sets = st.builds(
    lambda n, d, seed: random_open_set(n, d, seed),
    st.integers(1, 6),
    st.integers(12, 64),
    st.integers(0, 2**32),
)
rationals = st.fractions(min_value=0, max_value=1, max_denominator=97)


class TestNormalize:
    def test_overlap_merge(self):
        E = normalize([Arc(F(1, 10), F(2, 10)), Arc(F(25, 100), F(2, 10))])
        assert E.arcs == (Arc(F(1, 10), F(35, 100)),)

    def test_wrap_merge_against_membership(self):
        raw = [Arc(F(9, 10), F(2, 10)), Arc(F(5, 100), F(1, 10))]
        E = normalize(raw)
        assert E.arcs == (Arc(F(9, 10), F(25, 100)),)
        union = np.zeros(10_000, dtype=bool)
        for a in raw:
            union |= membership_grid(CircleOpenSet((a,)))
        assert np.array_equal(membership_grid(E), union)

    def test_empty(self):
        E = normalize([])
        assert E.is_empty and E.measure == 0

    @pytest.mark.parametrize("length", [F(0), F(-1, 2), F(3, 2)])
    def test_bad_length(self, length):
        with pytest.raises(InvalidInputError):
            Arc(F(0), length)

    def test_float_rejected(self):
        with pytest.raises(InvalidInputError):
            as_fraction(0.5)
        with pytest.raises(InvalidInputError):
            as_fraction("0.5")

    def test_length_one_is_full(self):
        assert normalize([Arc(F(1, 3), F(1))]).is_full


class TestMeasureAndTranslate:
    def test_half(self):
        assert measure(CircleOpenSet.of((0, F(1, 2)))) == F(1, 2)

    def test_fat_cantor_measure(self):
        E, _ = fat_cantor_complement(FatCantorSpec(F(1, 4), 6))
        assert measure(E) == sum(F(2 ** (k - 1), 4**k) for k in range(1, 7))

    def test_rigid_shift(self):
        assert translate(CircleOpenSet.of((0, F(1, 4))), F(1, 2)) == CircleOpenSet.of((F(1, 2), F(1, 4)))

    @given(random_sets, rationals)
    def test_round_trip(self, E, h):
        assert translate(E, 0) == E
        assert translate(translate(E, h), -h) == E
        assert translate(E, h).measure == E.measure


class TestTau:
    def test_half_interval(self):
        E = CircleOpenSet.of((0, F(1, 2)))
        assert tau(E, F(1, 8)) == F(1, 4) == tau_bruteforce(E, F(1, 8))

    def test_sharp_configuration(self):
        E = CircleOpenSet.of((0, F(1, 4)), (F(1, 2), F(1, 4)))
        assert tau(E, F(1, 8)) == F(1, 2) == 2 * F(1, 8) * E.count

    def test_zero_shift(self):
        assert tau(random_open_set(4, 40, 1), 0) == 0

    def test_one_sided_half(self):
        E = random_open_set(5, 50, 3)
        assert one_sided_incidence(E, F(1, 9)) * 2 == tau(E, F(1, 9))

    @settings(max_examples=300)
    @given(random_sets, rationals)
    def test_against_bruteforce(self, E, h):
        assert tau(E, h) == tau_bruteforce(E, h)

    @given(random_sets, rationals, rationals)
    def test_rotation_invariance_and_symmetry(self, E, h, c):
        t = tau(E, h)
        assert t == tau(translate(E, c), h)
        assert t == tau(E, 1 - h)

    @given(random_sets, rationals)
    def test_elementary_bounds(self, E, h):
        t = tau(E, h)
        K = 1 - E.measure
        assert 0 <= t <= min(2 * h * E.count, 2 * min(E.measure, K))
        assert t <= 2 * kh_deficit(E, h)

    @given(random_sets, st.integers(1, 50))
    def test_linear_below_min_gap(self, E, k):
        m = min(E.lengths + E.gaps())
        h = m * F(k, 50)
        assert tau(E, h) == 2 * h * E.count

    @given(random_sets, st.integers(2, 40))
    def test_scaling_exactness(self, E, q):
        # same set written over a common multiple of its denominators
        scaled = CircleOpenSet(tuple(Arc(F(a.start * q * 1, q), F(a.length * q, q)) for a in E.arcs))
        assert tau(scaled, F(1, 7)) == tau(E, F(1, 7))


class TestTauSup:
    def test_half_interval(self):
        assert tau_sup(CircleOpenSet.of((0, F(1, 2))), F(1, 4)) == F(1, 2)

    def test_two_arcs(self):
        E = CircleOpenSet.of((0, F(1, 4)), (F(1, 2), F(1, 4)))
        value, at = tau_sup_with_argmax(E, F(1, 2))
        assert value == 1 and tau(E, at) == 1

    @pytest.mark.parametrize("t", [F(0), F(3, 4), F(-1, 8)])
    def test_range(self, t):
        with pytest.raises(InvalidInputError):
            tau_sup(CircleOpenSet.of((0, F(1, 2))), t)

    @settings(max_examples=60, deadline=None)
    @given(random_sets, st.fractions(min_value=F(1, 64), max_value=F(1, 2), max_denominator=64))
    def test_dense_grid_oracle(self, E, t):
        step = 1e-5
        hs = np.append(np.arange(1, int(float(t) / step)) * step, float(t))
        dense = float_tau(E, hs).max()
        exact = float(tau_sup(E, t))
        assert dense <= exact + 1e-9
        assert exact <= dense + 2 * step * E.count + 1e-9

    @given(random_sets, rationals)
    def test_dominates_and_monotone(self, E, t):
        t = min(max(t, F(1, 97)), F(1, 2))
        assert tau_sup(E, t) >= tau(E, t)
        assert tau_sup(E, t) >= tau_sup(E, t / 2)

    @given(random_sets, st.fractions(min_value=F(1, 64), max_value=F(1, 2), max_denominator=64))
    def test_attained_on_critical_shifts(self, E, t):
        assert tau_sup(E, t) == max(tau(E, h) for h in critical_shifts(E, t))


class TestKhDeficit:
    def test_equality_case(self):
        E = CircleOpenSet.of((0, F(1, 2)))
        assert kh_deficit(E, F(1, 8)) == F(1, 4) == tau(E, F(1, 8))

    def test_saturation(self):
        E = random_open_set(4, 40, 9)
        assert kh_deficit(E, max(E.lengths) / 2) == E.measure

    def test_zero(self):
        assert kh_deficit(random_open_set(3, 30, 2), 0) == 0

    def test_degenerate(self):
        assert kh_deficit(CircleOpenSet.empty(), F(1, 4)) == 0
        assert kh_deficit(CircleOpenSet.full(), F(1, 4)) == 0

    def test_tau_can_exceed_single_deficit(self):
        # one arc of length between h and 2h: tau = 2h but |K(h) minus K| = l
        E = CircleOpenSet.of((0, F(3, 16)))
        h = F(1, 8)
        assert tau(E, h) == F(1, 4) > kh_deficit(E, h) == F(3, 16)

    @settings(max_examples=40, deadline=None)
    @given(random_sets, rationals)
    def test_against_neighbourhood_grid(self, E, h):
        h = h / 4
        n = 2000
        xs = [F(2 * k + 1, 2 * n) for k in range(n)]
        ends = E.endpoints()
        near = sum(
            1 for x in xs if x in E and any(min((x - e) % 1, (e - x) % 1) <= h for e in ends)
        )
        # grid count misses at most one cell per endpoint neighbourhood edge
        assert abs(F(near, n) - kh_deficit(E, h)) <= F(2 * len(ends), n)
        assert kh_measure(E, h) == 1 - E.measure + kh_deficit(E, h)
