import os

import pytest
from hypothesis import HealthCheck, settings

from edtqueue.channel import ChannelParams

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def fig4_channel():
    """lam = 3, mu = 2: the channel behind the fixed-T figures."""
    return ChannelParams(3.0, 2.0)


@pytest.fixture
def fig9_channel():
    return ChannelParams(10.0, 2.0)
