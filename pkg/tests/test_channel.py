import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edtqueue.channel import (
    ChannelParams,
    SensingMode,
    SensingStrategy,
    beta,
    p_on_given_off,
    stationary_on_prob,
)
from edtqueue.errors import DomainError

durations = st.floats(min_value=1e-2, max_value=1e2)


def _state_after(rng, params, start_on, t, n):
    """Fraction of ``n`` CTMC paths that are busy ``t`` after a known state."""
    on = np.full(n, start_on)
    clock = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    while alive.any():
        mean = np.where(on, params.lam, params.mu)
        clock = clock + np.where(alive, rng.exponential(mean), 0.0)
        alive &= clock < t
        on = np.where(alive, ~on, on)
    return on.mean()


class TestParams:
    @pytest.mark.parametrize("lam,mu", [(0.0, 1.0), (1.0, -2.0), (math.inf, 1.0), (math.nan, 1.0)])
    def test_rejects_bad_durations(self, lam, mu):
        with pytest.raises(DomainError):
            ChannelParams(lam, mu)

    def test_strategy_validation(self):
        assert SensingStrategy.periodic(0.5).ts == 0.5
        assert SensingStrategy.continuous().mode is SensingMode.CONTINUOUS
        with pytest.raises(DomainError):
            SensingStrategy(SensingMode.PERIODIC)
        with pytest.raises(DomainError):
            SensingStrategy(SensingMode.CONTINUOUS, 1.0)
        with pytest.raises(DomainError):
            SensingStrategy.periodic(0.0)


class TestStationary:
    def test_values(self):
        assert stationary_on_prob(ChannelParams(3.0, 2.0)) == pytest.approx(0.6)
        assert stationary_on_prob(ChannelParams(4.0, 4.0)) == pytest.approx(0.5)
        assert stationary_on_prob(ChannelParams(10.0, 2.0)) == pytest.approx(10.0 / 12.0)


class TestBeta:
    def test_reference_value(self, fig4_channel):
        assert beta(fig4_channel, 0.5) == pytest.approx(0.6 + 0.4 * math.exp(-5.0 / 12.0), rel=1e-15)
        assert beta(fig4_channel, 0.5) == pytest.approx(0.86370, abs=5e-6)

    def test_limits(self, fig4_channel):
        assert beta(fig4_channel, 1e-12) == pytest.approx(1.0, abs=1e-11)
        assert beta(fig4_channel, 1e4) == pytest.approx(0.6, rel=1e-15)

    def test_rejects_nonpositive_period(self, fig4_channel):
        with pytest.raises(DomainError):
            beta(fig4_channel, 0.0)

    def test_approximate_form(self, fig4_channel):
        assert beta(fig4_channel, 0.5, approximate=True) == pytest.approx(math.exp(-0.5 / 3.0))

    @given(durations, durations, st.floats(min_value=1e-4, max_value=1e3))
    def test_between_stationary_and_one(self, lam, mu, ts):
        p = ChannelParams(lam, mu)
        assert stationary_on_prob(p) <= beta(p, ts) <= 1.0

    @given(durations, durations, st.floats(min_value=1e-3, max_value=10.0),
           st.floats(min_value=1e-3, max_value=10.0))
    def test_chapman_kolmogorov(self, lam, mu, t1, t2):
        # busy -> busy over t1 + t2 through either state at t1
        p = ChannelParams(lam, mu)
        b1, b2 = beta(p, t1), beta(p, t2)
        via = b1 * b2 + (1.0 - b1) * p_on_given_off(p, t2)
        assert beta(p, t1 + t2) == pytest.approx(via, rel=1e-12)

    def test_monte_carlo_probe(self, fig4_channel):
        rng = np.random.default_rng(7)
        n = 200_000
        est = _state_after(rng, fig4_channel, True, 0.5, n)
        b = beta(fig4_channel, 0.5)
        assert abs(est - b) <= 4.0 * math.sqrt(b * (1 - b) / n)


class TestOnGivenOff:
    def test_limits(self, fig9_channel):
        assert p_on_given_off(fig9_channel, 0.0) == 0.0
        assert p_on_given_off(fig9_channel, 1e5) == pytest.approx(10.0 / 12.0)

    def test_reference_value(self, fig9_channel):
        expected = (10.0 / 12.0) * (1.0 - math.exp(-0.6))
        assert p_on_given_off(fig9_channel, 1.0) == pytest.approx(expected, rel=1e-15)

    def test_monte_carlo_probe(self, fig9_channel):
        rng = np.random.default_rng(11)
        n = 200_000
        est = _state_after(rng, fig9_channel, False, 1.0, n)
        p = p_on_given_off(fig9_channel, 1.0)
        assert abs(est - p) <= 4.0 * math.sqrt(p * (1 - p) / n)

    def test_negative_time(self, fig9_channel):
        with pytest.raises(DomainError):
            p_on_given_off(fig9_channel, -1e-3)

    @given(durations, durations, st.floats(min_value=0.0, max_value=1e3))
    def test_monotone_to_stationary(self, lam, mu, t):
        p = ChannelParams(lam, mu)
        assert 0.0 <= p_on_given_off(p, t) <= stationary_on_prob(p) * (1 + 1e-15)
