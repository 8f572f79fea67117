import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edtqueue.channel import ChannelParams, beta
from edtqueue.edt import (
    DiscreteEdtPmf,
    MixedDistribution,
    conditional_waiting_pmfs,
    edt_pdf_continuous,
    edt_pmf_periodic,
    periodic_waiting_table,
    prob_k_slots,
    waiting_density_poff,
    waiting_density_poff_series,
    waiting_dist_poff,
    waiting_pdf_pon,
    waiting_pdf_pon_series,
    waiting_pmf_poff_periodic,
    waiting_pmf_poff_periodic_series,
    waiting_pmf_pon_periodic,
    waiting_pmf_pon_periodic_series,
)
from edtqueue.errors import DomainError
from edtqueue.service import moments_poff_continuous, moments_pon_continuous

# (t=5, ttr=10, lam=3, mu=2), mpmath at 40 digits, frozen
PON_T5 = 0.02320631293201239163
POFF_T5 = 0.036524327832526370848

# periodic waiting PMFs at (ttr=10, lam=3, mu=2, ts=0.5) from the slot-count
# mixture sum_k P_k NegBin(k) in mpmath, frozen: n -> (busy start, idle start)
PERIODIC_ORACLE = {
    1: (0.00091840742926047000218, 0.0045920371463023500109),
    5: (0.003254427566130370102, 0.0083965928925427430295),
    20: (0.014306573456217688942, 0.018472490206299474262),
    60: (0.010668919029794032569, 0.0078895792029036895117),
}

channels = st.builds(ChannelParams, st.floats(min_value=0.2, max_value=20.0),
                     st.floats(min_value=0.2, max_value=20.0))
ttrs = st.floats(min_value=0.05, max_value=30.0)


def _erlang_mixture(t, ttr, lam, mu, shift, terms=200):
    m = ttr / mu
    total = []
    for k in range(1 + shift, terms + 1):
        j = k - shift
        log_pk = (k - 1) * math.log(m) - m - math.lgamma(k)
        log_e = (j - 1) * math.log(t) - t / lam - j * math.log(lam) - math.lgamma(j)
        total.append(math.exp(log_pk + log_e))
    return math.fsum(total)


class TestSlots:
    def test_values(self):
        assert prob_k_slots(1, 1e-300, 2.0) == pytest.approx(1.0)
        assert prob_k_slots(1, 10.0, 2.0) == pytest.approx(math.exp(-5.0), rel=1e-15)
        assert prob_k_slots(1, 10.0, 2.0) == pytest.approx(6.738e-3, rel=1e-3)

    def test_normalization(self):
        assert math.fsum(prob_k_slots(k, 10.0, 2.0) for k in range(1, 200)) == \
            pytest.approx(1.0, abs=1e-12)

    def test_k_zero(self):
        with pytest.raises(DomainError):
            prob_k_slots(0, 1.0, 1.0)


class TestContinuousWaiting:
    def test_origin(self, fig4_channel):
        assert waiting_pdf_pon(0.0, 10.0, fig4_channel) == pytest.approx(math.exp(-5.0) / 3.0)

    def test_high_precision(self, fig4_channel):
        assert waiting_pdf_pon(5.0, 10.0, fig4_channel) == pytest.approx(PON_T5, rel=1e-12)
        assert waiting_density_poff(5.0, 10.0, fig4_channel) == pytest.approx(POFF_T5, rel=1e-12)

    def test_against_partial_erlang_sum(self, fig4_channel):
        assert waiting_pdf_pon(5.0, 10.0, fig4_channel) == \
            pytest.approx(_erlang_mixture(5.0, 10.0, 3.0, 2.0, 0), abs=1e-10)
        assert waiting_density_poff(5.0, 10.0, fig4_channel) == \
            pytest.approx(_erlang_mixture(5.0, 10.0, 3.0, 2.0, 1), abs=1e-10)

    @given(st.floats(min_value=1e-3, max_value=300.0), ttrs, channels)
    def test_bessel_and_series_forms_agree(self, t, ttr, params):
        assert waiting_pdf_pon(t, ttr, params) == \
            pytest.approx(waiting_pdf_pon_series(t, ttr, params), rel=1e-9, abs=1e-10)
        assert waiting_density_poff(t, ttr, params) == \
            pytest.approx(waiting_density_poff_series(t, ttr, params), rel=1e-9, abs=1e-10)

    def test_no_overflow_at_large_arguments(self, fig4_channel):
        v = waiting_pdf_pon(np.array([1e4, 1e6]), 5e3, fig4_channel)
        assert np.all(np.isfinite(v)) and np.all(v >= 0.0)

    def test_negative_time(self, fig4_channel):
        with pytest.raises(DomainError):
            waiting_pdf_pon(-1.0, 10.0, fig4_channel)

    def test_poff_law(self, fig4_channel):
        law = waiting_dist_poff(10.0, fig4_channel)
        assert law.atom_mass == pytest.approx(math.exp(-5.0))
        assert law.atom_mass == pytest.approx(prob_k_slots(1, 10.0, 2.0))
        assert law.total_mass() == pytest.approx(1.0, abs=1e-8)

    def test_poff_law_without_work(self, fig4_channel):
        law = waiting_dist_poff(0.0, fig4_channel)
        assert law.atoms == ((0.0, 1.0),)
        assert law.continuous_mass() == 0.0


class TestContinuousEdt:
    def test_atom(self, fig4_channel):
        law = edt_pdf_continuous(10.0, fig4_channel)
        assert law.atoms[0][0] == 10.0
        assert law.atom_mass == pytest.approx(0.4 * math.exp(-5.0), rel=1e-15)
        assert law.atom_mass == pytest.approx(2.695e-3, rel=1e-3)

    def test_zero_below_ttr(self, fig4_channel):
        law = edt_pdf_continuous(10.0, fig4_channel)
        assert np.all(law.pdf(np.array([0.0, 5.0, 9.999])) == 0.0)

    def test_mean_matches_closed_form_moments(self, fig4_channel):
        law = edt_pdf_continuous(10.0, fig4_channel)
        expected = 0.6 * moments_pon_continuous(10.0, fig4_channel).m1 \
            + 0.4 * moments_poff_continuous(10.0, fig4_channel).m1
        assert law.mean == pytest.approx(expected, rel=1e-8)

    @given(ttrs, channels)
    def test_normalization(self, ttr, params):
        assert edt_pdf_continuous(ttr, params).total_mass() == pytest.approx(1.0, abs=1e-7)

    def test_cdf_jumps_at_atom(self, fig4_channel):
        law = edt_pdf_continuous(10.0, fig4_channel)
        assert law.cdf(10.0) - law.cdf_left(10.0) == pytest.approx(law.atom_mass)
        assert law.cdf(law.support_high) == pytest.approx(1.0, abs=1e-8)

    def test_rejects_nonpositive_ttr(self, fig4_channel):
        with pytest.raises(DomainError):
            edt_pdf_continuous(0.0, fig4_channel)

    def test_atom_mass_validation(self):
        with pytest.raises(DomainError):
            MixedDistribution(atoms=((0.0, 1.5),), density=lambda t: 0 * t,
                              support_low=0.0, support_high=1.0)


class TestPeriodicWaiting:
    @pytest.mark.parametrize("n", sorted(PERIODIC_ORACLE))
    def test_high_precision(self, fig4_channel, n):
        pon, poff = PERIODIC_ORACLE[n]
        assert waiting_pmf_pon_periodic(n, 10.0, fig4_channel, 0.5) == pytest.approx(pon, rel=1e-11)
        assert waiting_pmf_poff_periodic(n, 10.0, fig4_channel, 0.5) == pytest.approx(poff, rel=1e-11)

    def test_small_ttr_limits(self, fig4_channel):
        b = beta(fig4_channel, 0.5)
        assert waiting_pmf_pon_periodic(1, 1e-12, fig4_channel, 0.5) == pytest.approx(1.0 - b)
        assert waiting_pmf_pon_periodic(0, 10.0, fig4_channel, 0.5) == 0.0
        assert waiting_pmf_poff_periodic(0, 1e-12, fig4_channel, 0.5) == pytest.approx(1.0)
        assert waiting_pmf_poff_periodic(0, 10.0, fig4_channel, 0.5) == \
            pytest.approx(math.exp(-5.0))

    def test_binomial_sum_at_n5(self, fig4_channel):
        b = beta(fig4_channel, 0.5)
        x = 10.0 * (1 - b) / (2.0 * b)
        direct = (1 - b) * b ** 4 * math.exp(-5.0) * math.fsum(
            math.comb(4, k) * x ** k / math.factorial(k) for k in range(5))
        assert waiting_pmf_pon_periodic(5, 10.0, fig4_channel, 0.5) == pytest.approx(direct, rel=1e-12)

    def test_normalization(self, fig4_channel):
        pon, poff = conditional_waiting_pmfs(10.0, fig4_channel, 0.5)
        assert math.fsum(pon) == pytest.approx(1.0, abs=1e-9)
        assert math.fsum(poff) == pytest.approx(1.0, abs=1e-9)

    @given(st.integers(min_value=1, max_value=150), ttrs, channels,
           st.floats(min_value=0.01, max_value=2.0))
    def test_hypergeometric_and_binomial_forms_agree(self, n, ttr, params, ts):
        for fast, slow in ((waiting_pmf_pon_periodic, waiting_pmf_pon_periodic_series),
                           (waiting_pmf_poff_periodic, waiting_pmf_poff_periodic_series)):
            assert fast(n, ttr, params, ts) == pytest.approx(slow(n, ttr, params, ts),
                                                             rel=1e-10, abs=1e-300)

    def test_recurrence_matches_pointwise(self, fig4_channel):
        pon, poff = periodic_waiting_table([10.0, 3.0], fig4_channel, 0.5, 80)
        for n in (0, 1, 7, 80):
            assert pon[0, n] == pytest.approx(waiting_pmf_pon_periodic(n, 10.0, fig4_channel, 0.5),
                                              rel=1e-11, abs=1e-300)
            assert poff[1, n] == pytest.approx(waiting_pmf_poff_periodic(n, 3.0, fig4_channel, 0.5),
                                               rel=1e-11, abs=1e-300)

    def test_recurrence_survives_long_tables(self, fig4_channel):
        pon, poff = periodic_waiting_table([40.0], fig4_channel, 0.01, 60_000)
        assert np.all(np.isfinite(pon)) and np.all(np.isfinite(poff))
        assert math.fsum(pon[0]) == pytest.approx(1.0, abs=1e-9)

    def test_non_integer_n(self, fig4_channel):
        with pytest.raises(DomainError):
            waiting_pmf_pon_periodic(1.5, 10.0, fig4_channel, 0.5)


class TestPeriodicEdt:
    def test_first_entry(self, fig4_channel):
        pmf = edt_pmf_periodic(10.0, fig4_channel, 0.5)
        assert pmf[0] == pytest.approx(0.4 * math.exp(-5.0), rel=1e-14)

    def test_normalization(self, fig4_channel):
        assert edt_pmf_periodic(10.0, fig4_channel, 0.5).total() == pytest.approx(1.0, abs=1e-9)

    def test_converges_to_density(self, fig4_channel):
        pmf = edt_pmf_periodic(10.0, fig4_channel, 0.01)
        law = edt_pdf_continuous(10.0, fig4_channel)
        t = pmf.support
        central = (t > 14.0) & (t < 45.0)
        ratio = pmf.probs[central] / 0.01 / law.pdf(t[central])
        assert np.max(np.abs(ratio - 1.0)) <= 0.03

    def test_lattice_helpers(self, fig4_channel):
        pmf = DiscreteEdtPmf(ttr=1.0, ts=0.5, probs=[0.25, 0.5, 0.25])
        assert pmf.mean == pytest.approx(1.5)
        assert pmf.cdf(1.49) == pytest.approx(0.25)
        assert pmf.cdf(1.5) == pytest.approx(0.75)
        assert pmf[7] == 0.0
        with pytest.raises(ValueError):
            pmf.probs[0] = 1.0

    def test_negative_entries_rejected(self):
        with pytest.raises(DomainError):
            DiscreteEdtPmf(ttr=1.0, ts=0.5, probs=[1.1, -0.1])
