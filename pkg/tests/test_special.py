import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from edtqueue.errors import DomainError, NumericFailure
from edtqueue.special import (
    LogScaledValue,
    bessel_i_scaled,
    erlang_mgf,
    erlang_pdf,
    kummer_1f1_terminating,
    kummer_1f1_terminating_log,
    log_bessel_i,
    neg_binomial_mgf,
    neg_binomial_pmf,
    neumaier_sum,
)

# exp(-x) I_n(x) at 40 digits (mpmath.besseli), frozen
BESSEL_ORACLE = [
    (0, 0.5, 0.64503527044915006811),
    (0, 1.0, 0.4657596075936404365),
    (0, 5.0, 0.18354081260932835307),
    (0, 29.9, 0.073269219046001905951),
    (0, 30.1, 0.073023294131060943593),
    (0, 100.0, 0.039944379299096682648),
    (0, 1e4, 0.0039894726746047321064),
    (0, 1e6, 0.00039894233026924577878),
    (1, 0.5, 0.15642080318487169714),
    (1, 1.0, 0.20791041534970844887),
    (1, 5.0, 0.16397226694454235693),
    (1, 29.9, 0.072033374911868786146),
    (1, 30.1, 0.071799854351014334837),
    (1, 100.0, 0.039744153025130252674),
    (1, 1e4, 0.0039892731959836622645),
    (1, 1e6, 0.00039894213079803077631),
]

# 1F1(a; b; x) at 40 digits (mpmath.hyp1f1), frozen.  Negative x is the
# regime of the periodic PMFs; the positive-x rows are short alternating sums.
KUMMER_ORACLE = [
    (-20, 2, 3.7, -0.11875013900084675995),
    (-7, 1, 2.25, 0.44854420253208705357),
    (-7, 1, -2.25, 185.13777781895228795),
    (-50, 1, -12.5, 1193402788883667564.3),
    (-30, 2, -40.0, 3.7215914334799090173e+20),
    (-199, 1, -0.37, 2340673.0272426166885),
    (-199, 2, -0.37, 269638.40187670833875),
]


class TestBessel:
    def test_origin(self):
        assert bessel_i_scaled(0, 0.0) == 1.0
        assert bessel_i_scaled(1, 0.0) == 0.0

    def test_unit_argument_against_power_series(self):
        series = math.fsum(0.25 ** k / math.factorial(k) ** 2 for k in range(40))
        assert bessel_i_scaled(0, 1.0) == pytest.approx(math.exp(-1.0) * series, rel=1e-14)

    @pytest.mark.parametrize("order,x,expected", BESSEL_ORACLE)
    def test_high_precision_values(self, order, x, expected):
        assert bessel_i_scaled(order, x) == pytest.approx(expected, rel=1e-12)

    def test_array_matches_scalar(self):
        xs = np.array([o[1] for o in BESSEL_ORACLE if o[0] == 0])
        got = bessel_i_scaled(0, xs)
        assert got.shape == xs.shape
        for x, g in zip(xs, got):
            assert g == pytest.approx(bessel_i_scaled(0, float(x)), rel=1e-14)

    @pytest.mark.parametrize("bad", [-1e-9, -3.0, math.nan])
    def test_negative_argument(self, bad):
        with pytest.raises(DomainError):
            bessel_i_scaled(0, bad)

    def test_order_two_rejected(self):
        with pytest.raises(DomainError):
            bessel_i_scaled(2, 1.0)

    def test_log_form(self):
        assert log_bessel_i(0, 1e6) == pytest.approx(1e6 + math.log(0.00039894233026924577878),
                                                     rel=1e-15)

    @given(st.floats(min_value=1e-3, max_value=1e5))
    def test_wronskian_like_ordering(self, x):
        # I1 < I0 for x > 0, and both scaled values stay below 1
        i0, i1 = bessel_i_scaled(0, x), bessel_i_scaled(1, x)
        assert 0.0 < i1 < i0 <= 1.0

    @given(st.floats(min_value=1e-2, max_value=1e4))
    def test_derivative_identity(self, x):
        # d/dx [e^-x I0] = e^-x (I1 - I0)
        h = 1e-6 * max(1.0, x)
        num = (bessel_i_scaled(0, x + h) - bessel_i_scaled(0, x - h)) / (2 * h)
        exact = bessel_i_scaled(1, x) - bessel_i_scaled(0, x)
        assert num == pytest.approx(exact, rel=1e-5, abs=1e-12)


class TestKummer:
    def test_trivial_cases(self):
        assert kummer_1f1_terminating(0, 1, 7.3) == 1.0
        for x in (-4.0, 0.0, 0.3, 12.0):
            assert kummer_1f1_terminating(-1, 1, x) == pytest.approx(1.0 - x, rel=1e-15, abs=1e-15)
        assert kummer_1f1_terminating(-2, 2, 1.0) == pytest.approx(1.0 / 6.0, rel=1e-15)

    @pytest.mark.parametrize("a,b,x,expected", KUMMER_ORACLE)
    def test_high_precision_values(self, a, b, x, expected):
        assert kummer_1f1_terminating(a, b, x) == pytest.approx(expected, rel=1e-10)

    def test_log_form_keeps_huge_values(self):
        v = kummer_1f1_terminating_log(-2000, 1, -1500.0)
        assert v.sign == 1
        assert v.log_magnitude == pytest.approx(2814.8807297441659324, rel=1e-13)
        with pytest.raises(NumericFailure):
            kummer_1f1_terminating(-2000, 1, -1500.0)

    @pytest.mark.parametrize("a,b", [(0.5, 1), (1, 1), (-2, 0), (-2, -1), (-2, 1.5)])
    def test_bad_parameters(self, a, b):
        with pytest.raises(DomainError):
            kummer_1f1_terminating(a, b, 1.0)

    @given(st.integers(min_value=0, max_value=40), st.floats(min_value=-20, max_value=0))
    def test_laguerre_three_term_recurrence(self, n, x):
        # L_n(x) = 1F1(-n; 1; x):  (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}
        ln = kummer_1f1_terminating(-n, 1, x)
        ln1 = kummer_1f1_terminating(-(n + 1), 1, x)
        lm1 = kummer_1f1_terminating(-(n - 1), 1, x) if n > 0 else 0.0
        lhs = (n + 1) * ln1
        rhs = (2 * n + 1 - x) * ln - n * lm1
        scale = max(abs(lhs), abs((2 * n + 1 - x) * ln), abs(n * lm1), 1.0)
        assert abs(lhs - rhs) <= 1e-10 * scale


class TestErlang:
    def test_trivial_values(self):
        assert erlang_pdf(1, 3.0, 0.0) == pytest.approx(1.0 / 3.0)
        assert erlang_pdf(2, 1.0, 1.0) == pytest.approx(math.exp(-1.0))

    def test_normalization(self):
        total = quad(lambda t: erlang_pdf(5, 2.0, t), 0.0, math.inf, epsabs=1e-13)[0]
        assert total == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("k,scale", [(0, 1.0), (2, 0.0), (2, -1.0)])
    def test_domain(self, k, scale):
        with pytest.raises(DomainError):
            erlang_pdf(k, scale, 1.0)

    def test_large_shape_uses_log_route(self):
        # both branches must agree where they meet
        t = 30.0
        direct = t ** 20 * math.exp(-t) / math.factorial(20)
        assert erlang_pdf(21, 1.0, t) == pytest.approx(direct, rel=1e-12)

    def test_mgf(self):
        assert erlang_mgf(3, 2.0, -0.5) == pytest.approx(0.125)
        with pytest.raises(DomainError):
            erlang_mgf(1, 2.0, 0.5)


class TestNegativeBinomial:
    def test_first_success(self):
        for b in (0.0, 0.3, 0.9):
            assert neg_binomial_pmf(1, b, 1) == pytest.approx(1.0 - b)

    def test_direct_formula(self):
        assert neg_binomial_pmf(2, 0.5, 3) == pytest.approx(0.25)

    def test_impossible_event_is_zero(self):
        assert neg_binomial_pmf(4, 0.5, 3) == 0.0

    def test_normalization(self):
        n = np.arange(3, 400)
        assert math.fsum(neg_binomial_pmf(3, 0.8, n)) == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(min_value=1, max_value=30), st.floats(min_value=0.0, max_value=0.95),
           st.integers(min_value=1, max_value=200))
    def test_scalar_and_array_agree(self, k, b, n):
        scalar = neg_binomial_pmf(k, b, n)
        arr = neg_binomial_pmf(k, b, np.array([n]))[0]
        assert arr == pytest.approx(scalar, rel=1e-11, abs=1e-300)

    def test_mgf_matches_summation(self):
        k, b, ts, s = 3, 0.8, 0.5, -0.2
        n = np.arange(k, 2000)
        direct = math.fsum(neg_binomial_pmf(k, b, n) * np.exp(s * ts * n))
        assert neg_binomial_mgf(k, b, ts, s) == pytest.approx(direct, rel=1e-12)

    @pytest.mark.parametrize("beta", [-0.1, 1.0])
    def test_beta_range(self, beta):
        with pytest.raises(DomainError):
            neg_binomial_pmf(1, beta, 1)


class TestLogScaledValue:
    def test_round_trip(self):
        for v in (-2.5, 0.0, 1e-300, 7.0):
            assert LogScaledValue.from_float(v).value == pytest.approx(v, rel=1e-15)

    def test_cancellation_to_zero(self):
        a = LogScaledValue.from_float(3.0)
        b = LogScaledValue.from_float(-3.0)
        assert (a + b).sign == 0

    def test_beyond_double_range(self):
        big = LogScaledValue.from_log(1000.0)
        small = LogScaledValue.from_log(-1000.0)
        assert (big * small).value == pytest.approx(1.0)

    def test_invariant_checked(self):
        with pytest.raises(DomainError):
            LogScaledValue(0.0, 0)

    @given(st.lists(st.floats(min_value=-1e10, max_value=1e10), max_size=50))
    def test_neumaier_matches_fsum(self, values):
        assert neumaier_sum(values) == pytest.approx(math.fsum(values), abs=1e-4)
