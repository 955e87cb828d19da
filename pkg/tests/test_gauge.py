import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from indicatrix.circle_set import CircleOpenSet, InvalidInputError
from indicatrix.constructions import random_open_set
from indicatrix.gauge import (
    GaugeFunction,
    LengthFamily,
    bt_index,
    gauge_sum,
    jensen_bound,
    validate_phi,
)

BUILTINS = [
    GaugeFunction.constant(),
    GaugeFunction.power(0.5),
    GaugeFunction.power(1.0),
    GaugeFunction.logpow(1.0),
    GaugeFunction.logpow(0.3),
    GaugeFunction.mixed(0.3, 0.5, 1.0),
    GaugeFunction.reciprocal(),
]


class TestMembership:
    @pytest.mark.parametrize("g", BUILTINS, ids=str)
    def test_builtins_pass(self, g):
        assert validate_phi(g).is_member

    def test_increasing_phi_rejected(self):
        rep = validate_phi(GaugeFunction.custom(lambda t: t))
        assert not rep.is_member
        assert any(kind == "phi increasing" for kind, _ in rep.witnesses)

    def test_logpow_c_is_e(self):
        assert GaugeFunction.logpow(1).c == pytest.approx(math.e)

    def test_parameter_ranges(self):
        for bad in (lambda: GaugeFunction.power(1.5), lambda: GaugeFunction.logpow(-0.1),
                    lambda: GaugeFunction.mixed(0.2, 1.0, 1.0), lambda: GaugeFunction("nope")):
            with pytest.raises(InvalidInputError):
                bad()

    def test_grid_size(self):
        with pytest.raises(InvalidInputError):
            validate_phi(GaugeFunction.constant(), grid_size=2)

    @pytest.mark.parametrize("g", BUILTINS, ids=str)
    def test_split_point_monotonicity(self, g):
        rng = random.Random(3)
        top = 1 / g.c
        for _ in range(500):
            h = rng.uniform(1e-6, top)
            small = rng.uniform(1e-9, h)
            big = rng.uniform(h, top)
            assert g(small) >= g(h) * (1 - 1e-12)
            assert g.psi(big) >= g.psi(h) * (1 - 1e-12)

    @pytest.mark.parametrize("g", BUILTINS, ids=str)
    def test_psi_integral_quadrature(self, g):
        a, b = 1e-4, 0.9 / g.c
        ref, _ = quad(g.psi, a, b, limit=200, epsabs=1e-13)
        assert g.psi_integral(a, b) == pytest.approx(ref, rel=1e-9)


class TestGaugeSum:
    def test_constant_gives_measure(self):
        E = random_open_set(6, 80, 4)
        assert gauge_sum(LengthFamily.of_set(E), GaugeFunction.constant()) == pytest.approx(float(E.measure))

    def test_reciprocal_gives_count(self):
        E = random_open_set(6, 80, 4)
        assert gauge_sum(LengthFamily.of_set(E), GaugeFunction.reciprocal()) == pytest.approx(6)

    @pytest.mark.parametrize("lam", [F(1, 4), F(1, 5), F(3, 10)])
    @pytest.mark.parametrize("alpha", [0.0, 0.2, 0.4, 0.6])
    def test_fat_cantor_power(self, lam, alpha):
        L = LengthFamily.geometric(1, 2, 1, lam)
        q = 2 * float(lam) ** (1 - alpha)
        got = gauge_sum(L, GaugeFunction.power(alpha))
        if q < 1:
            assert got == pytest.approx(0.5 * q / (1 - q), rel=1e-12)
        else:
            assert got == math.inf

    def test_logpow_against_partial_sums(self):
        L = LengthFamily.geometric(1, 2, 1, F(1, 4))
        g = GaugeFunction.logpow(1)
        partial = math.fsum(2 ** (k - 1) * 4.0**-k * k * math.log(4) for k in range(1, 400))
        assert gauge_sum(L, g) == pytest.approx(partial, rel=1e-12)

    @pytest.mark.parametrize("lam", [F(1, 4), F(1, 7), F(2, 7)])
    def test_finiteness_matches_index(self, lam):
        L = LengthFamily.geometric(1, 2, 1, lam)
        d = bt_index(L).value
        for beta in (d - 0.05, d + 0.05):
            finite = math.isfinite(gauge_sum(L, GaugeFunction.power(1 - beta)))
            assert finite == (beta > d)

    def test_finite_geometric_equals_list(self):
        L = LengthFamily.geometric(1, 2, 1, F(1, 4), stages=6)
        g = GaugeFunction.power(0.5)
        assert gauge_sum(L, g) == pytest.approx(gauge_sum(LengthFamily.explicit(L.as_list()), g))

    def test_custom_infinite_refused(self):
        with pytest.raises(InvalidInputError):
            gauge_sum(LengthFamily.geometric(1, 2, 1, F(1, 4)), GaugeFunction.custom(lambda t: 1.0))


class TestJensen:
    def test_equal_lengths(self):
        E = CircleOpenSet.of(*[(F(k, 8), F(1, 16)) for k in range(8)])
        g = GaugeFunction.power(0.5)
        assert gauge_sum(LengthFamily.of_set(E), g) == pytest.approx(jensen_bound(E, g), rel=1e-14)

    def test_two_lengths(self):
        g = GaugeFunction.power(0.5)
        lhs = gauge_sum(LengthFamily.explicit([F(1, 2), F(1, 8)]), g)
        rhs = jensen_bound([F(1, 2), F(1, 8)], g)
        assert lhs == pytest.approx(math.sqrt(0.5) + math.sqrt(8) / 8)
        assert rhs == pytest.approx(0.625 / math.sqrt(5 / 16))
        assert lhs <= rhs

    def test_random_logpow(self):
        g = GaugeFunction.logpow(1)
        checked = 0
        for seed in range(3000):
            E = random_open_set(random.Random(seed).randint(1, 10), 200, seed)
            if max(E.lengths) >= 1 / g.c:
                continue
            checked += 1
            assert gauge_sum(LengthFamily.of_set(E), g) <= jensen_bound(E, g) * (1 + 1e-12)
        assert checked >= 1000

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            jensen_bound(CircleOpenSet.empty(), GaugeFunction.constant())

    @given(st.lists(st.fractions(F(1, 1000), F(1, 3), max_denominator=1000), min_size=1, max_size=12),
           st.sampled_from(BUILTINS[:6]))
    def test_property(self, lengths, g):
        lengths = [l for l in lengths if l < 1 / g.c] or [F(1, 1000)]
        lhs = gauge_sum(LengthFamily.explicit(lengths), g)
        assert lhs <= jensen_bound(lengths, g) * (1 + 1e-12)


class TestIndex:
    def test_fat_cantor(self):
        assert bt_index(LengthFamily.geometric(1, 2, 1, F(1, 4))).value == pytest.approx(0.5)

    @pytest.mark.parametrize("lam", [F(1, 5), F(3, 10)])
    def test_solves_equation(self, lam):
        d = bt_index(LengthFamily.geometric(1, 2, 1, lam)).value
        assert 2 * float(lam) ** d == pytest.approx(1)

    def test_terekhin_lengths(self):
        assert bt_index(LengthFamily.geometric(1, 1, 1, F(1, 2))) == (0.0, False)

    def test_truncated(self):
        assert bt_index(LengthFamily.explicit([F(1, 8)] * 3)) == (0.0, True)

    def test_infinite_measure(self):
        with pytest.raises(InvalidInputError):
            bt_index(LengthFamily.geometric(1, 4, 1, F(1, 2)))
